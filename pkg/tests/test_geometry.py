from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlab.exceptions import DegenerateSegment, DimensionError, UserError
from qlab.geometry import (
    Box,
    SamplePlan,
    SegmentNeighborhood,
    as_point,
    convex_combination,
    dedupe_rows,
    dyadic_lambdas,
    rng,
    sample_box,
    segment_lambdas,
    segment_points,
    unit_directions,
)


def test_open_segment_excludes_the_endpoints():
    points = segment_points([0.0], [1.0], 3)
    assert points.tolist() == [[0.25], [0.5], [0.75]]


def test_closed_segment_includes_the_endpoints():
    assert segment_points([0.0, 0.0], [2.0, 4.0], 2, open=False).tolist() == [
        [0.0, 0.0],
        [2.0, 4.0],
    ]
    assert segment_lambdas(1, open=False).tolist() == [0.0]


def test_degenerate_segment():
    with pytest.raises(DegenerateSegment):
        segment_points([1.0, 2.0], [1.0, 2.0], 5)


def test_segment_dimension_mismatch():
    with pytest.raises(DimensionError):
        segment_points([1.0, 2.0], [1.0], 5)


def test_convex_combination_matches_the_definition():
    x = np.array([2.0, -1.0])
    y = np.array([0.0, 3.0])
    assert convex_combination(x, y, 0.25).tolist() == [0.5, 2.0]
    rows = convex_combination(x, y, np.array([0.0, 1.0]))
    assert rows.tolist() == [y.tolist(), x.tolist()]


def test_dyadic_lambdas_go_coarse_to_fine():
    assert dyadic_lambdas(3).tolist() == [0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875]


def test_unit_directions_in_one_dimension():
    assert unit_directions(1, 8, seed=3).tolist() == [[1.0], [-1.0]]


def test_unit_directions_start_with_the_signed_axes():
    directions = unit_directions(3, 5, seed=42)
    assert directions.shape == (11, 3)
    assert directions[:6].tolist() == [
        [1.0, 0.0, 0.0],
        [-1.0, -0.0, -0.0],
        [0.0, 1.0, 0.0],
        [-0.0, -1.0, -0.0],
        [0.0, 0.0, 1.0],
        [-0.0, -0.0, -1.0],
    ]
    assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)


def test_more_directions_extend_the_same_prefix():
    short = unit_directions(2, 4, seed=7)
    long = unit_directions(2, 9, seed=7)
    assert np.array_equal(long[: short.shape[0]], short)
    assert not np.array_equal(unit_directions(2, 4, seed=8), short)


def test_generators_are_reproducible_per_stream():
    assert rng(42, 1).uniform() == rng(42, 1).uniform()
    assert rng(42, 1).uniform() != rng(42, 2).uniform()
    assert rng(-1, 1).uniform() == rng(2**64 - 1, 1).uniform()


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_sample_box_fills_the_budget_inside_the_box(dim: int):
    box = Box.cube(dim, -2.0, 2.0)
    points = sample_box(box, 256, seed=42)
    assert points.shape == (256, dim)
    assert np.all(points >= -2.0) and np.all(points <= 2.0)


def test_sample_box_lattice_contains_centre_and_corners():
    points = sample_box(Box.cube(2, -2.0, 2.0), 256, seed=42).tolist()
    assert [0.0, 0.0] in points
    assert [-2.0, -2.0] in points
    assert [2.0, 2.0] in points


def test_sample_box_is_deterministic():
    box = Box.interval(-1.0, 3.0)
    assert np.array_equal(sample_box(box, 64, seed=5), sample_box(box, 64, seed=5))
    assert not np.array_equal(sample_box(box, 64, seed=5), sample_box(box, 64, seed=6))


def test_dedupe_rows_appends_only_new_points():
    points = np.array([[0.0], [1.0]])
    out = dedupe_rows(points, [(1.0,), (2.0,), (2.0,)])
    assert out.tolist() == [[0.0], [1.0], [2.0]]


def test_box_parse_and_print():
    box = Box.parse("-1..2, 0..3.5")
    assert box.lo == (-1.0, 0.0)
    assert box.hi == (2.0, 3.5)
    assert box.dim == 2
    assert Box.parse(str(box)) == box
    assert box.center.tolist() == [0.5, 1.75]
    assert box.contains([2.0, 0.0])
    assert not box.contains([2.5, 0.0])


@pytest.mark.parametrize("text", ["1..0", "abc", "1..2..3", "a..b", "0..inf"])
def test_box_parse_errors(text: str):
    with pytest.raises(UserError):
        Box.parse(text)


def test_box_requires_matching_bounds():
    with pytest.raises(DimensionError):
        Box((), ())
    with pytest.raises(DimensionError):
        Box((0.0, 1.0), (1.0,))


def test_segment_neighborhood_distance():
    hood = SegmentNeighborhood(np.array([0.0, 0.0]), np.array([2.0, 0.0]), 1.0)
    assert hood.distance([1.0, 1.0]) == 1.0
    assert hood.distance([3.0, 0.0]) == 1.0
    assert hood.distance([-3.0, 4.0]) == 5.0
    # Membership is strict.
    assert not hood.contains([1.0, 1.0])
    assert hood.contains([1.0, 0.5])


def test_segment_neighborhood_radius_must_be_positive():
    with pytest.raises(UserError):
        SegmentNeighborhood(np.zeros(1), np.ones(1), 0.0)


def test_sample_plan_defaults_and_validation():
    plan = SamplePlan()
    assert plan.export() == {
        "seed": 42,
        "points_per_box": 256,
        "lambdas_per_segment": 33,
        "directions_per_sphere": 8,
        "refinement_rounds": 3,
        "line_points": 4097,
    }
    with pytest.raises(UserError):
        SamplePlan(points_per_box=0)
    with pytest.raises(UserError):
        SamplePlan(line_points=-1)


def test_as_point_checks_finiteness_and_dimension():
    assert as_point(3.0).tolist() == [3.0]
    with pytest.raises(UserError):
        as_point([math.nan])
    with pytest.raises(DimensionError):
        as_point([1.0, 2.0], dim=3)


@given(
    st.lists(st.floats(-100, 100), min_size=2, max_size=2),
    st.lists(st.floats(-100, 100), min_size=2, max_size=2),
    st.floats(0.0, 1.0),
)
def test_points_on_the_segment_have_zero_distance(u: list[float], v: list[float], lam: float):
    pu, pv = np.array(u), np.array(v)
    hood = SegmentNeighborhood(pu, pv, 1.0)
    point = convex_combination(pv, pu, lam)
    assert hood.distance(point) <= 1e-9 * (1.0 + float(np.abs([*u, *v]).max()))
