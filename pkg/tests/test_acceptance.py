"""Catalog-wide runs at the default sample plan. Slow; deselect with `-m "not slow"`."""

from __future__ import annotations

import math

import numpy as np
import pytest

from qlab.alpha import AlphaMethod, estimate_alpha_star
from qlab.catalog import catalog_entries, catalog_lookup, kinks_in_box
from qlab.checks import (
    RobustParams,
    check_condition_b,
    check_quasiconvex_primal,
    check_quasimonotone,
    check_robust_condition_b,
    check_robust_pairs,
    check_robust_primal,
)
from qlab.geometry import SamplePlan, sample_in_box
from qlab.lemmas import LemmaVerdict, mvt_verify, tuacuctri_construct
from qlab.run import RunConfig, run_suite
from qlab.subdiff import frechet_membership, perturb
from qlab.verdict import CheckStatus, SegmentViolation

pytestmark = pytest.mark.slow

PLAN = SamplePlan()

EQUIVALENT_CHECKS = [check_quasiconvex_primal, check_condition_b, check_quasimonotone]

ROBUST_CHECKS = {
    "robust-primal": lambda f, box, alpha, plan: check_robust_primal(
        f, box, RobustParams(alpha), plan
    ),
    "robust-b": check_robust_condition_b,
    "robust-pairs": check_robust_pairs,
}


@pytest.mark.parametrize("f", catalog_entries(), ids=lambda f: f.name)
def test_primal_and_dual_characterizations_agree(f):
    expected = CheckStatus.SATISFIED if f.labels.quasiconvex else CheckStatus.VIOLATED
    for check in EQUIVALENT_CHECKS:
        verdict = check(f, f.default_box, PLAN)
        assert verdict.status == expected, check.__name__
        if verdict.witness is not None:
            assert verdict.witness.reverify(f)


@pytest.mark.parametrize("check", list(ROBUST_CHECKS))
@pytest.mark.parametrize(
    "name, alpha, status",
    [
        ("slanted_sine", 0.9, CheckStatus.SATISFIED),
        ("slanted_sine", 1.1, CheckStatus.VIOLATED),
        ("cubic", 0.05, CheckStatus.VIOLATED),
        ("cubic", 0.5, CheckStatus.VIOLATED),
        ("sqrt_abs", 0.05, CheckStatus.VIOLATED),
        ("sqrt_abs", 0.5, CheckStatus.VIOLATED),
        ("step", 0.05, CheckStatus.VIOLATED),
        ("step", 0.5, CheckStatus.VIOLATED),
        ("quadratic", 0.05, CheckStatus.SATISFIED),
        ("quadratic", 0.5, CheckStatus.SATISFIED),
        ("abs", 0.5, CheckStatus.SATISFIED),
        ("linear", 0.5, CheckStatus.SATISFIED),
        ("norm2d", 0.5, CheckStatus.SATISFIED),
    ],
)
def test_robust_checks_match_the_labelled_modulus(
    name: str, alpha: float, status: CheckStatus, check: str
):
    f = catalog_lookup(name)
    verdict = ROBUST_CHECKS[check](f, f.default_box, alpha, PLAN)
    assert verdict.status == status
    if verdict.witness is not None:
        assert verdict.witness.reverify(f)


@pytest.mark.parametrize("method", list(AlphaMethod))
def test_alpha_star_brackets(method: AlphaMethod):
    sine = catalog_lookup("slanted_sine")
    estimate = estimate_alpha_star(sine, sine.default_box, method, plan=PLAN)
    assert estimate.lower <= 1.0 <= estimate.upper
    assert estimate.width <= 0.02

    cubic = catalog_lookup("cubic")
    assert estimate_alpha_star(cubic, cubic.default_box, method, plan=PLAN).upper <= 0.05

    quadratic = catalog_lookup("quadratic")
    assert estimate_alpha_star(quadratic, quadratic.default_box, method, plan=PLAN).at_cap


@pytest.mark.parametrize("name", ["quadratic", "cubic", "slanted_sine", "linear"])
def test_mean_value_inequalities_on_random_segments(name: str):
    f = catalog_lookup(name)
    ends = sample_in_box(f.default_box, 100, seed=2024, stream=1)
    for a, b in zip(ends[0::2], ends[1::2]):
        trace = mvt_verify(f, a, b, PLAN)
        assert trace.mean_1 == LemmaVerdict.HOLDS, (a, b)
        assert trace.mean_2 == LemmaVerdict.HOLDS, (a, b)
        assert trace.mean_3 in (LemmaVerdict.HOLDS, LemmaVerdict.NOT_APPLICABLE), (a, b)


def test_primal_witness_on_the_negated_abs():
    f = catalog_lookup("neg_abs")
    witness = check_quasiconvex_primal(f, f.default_box, PLAN).witness
    # The dense line through the box carries the largest excess, 2 at x = 0.
    assert isinstance(witness, SegmentViolation)
    assert sorted([float(witness.x[0]), float(witness.y[0])]) == [-2.0, 2.0]
    assert witness.lam == 0.5
    assert witness.lhs == 0.0
    assert witness.rhs == -2.0

    shorter = SegmentViolation(
        x=np.array([-1.0]), y=np.array([1.0]), lam=0.5, lhs=0.0, rhs=-1.0
    )
    assert shorter.reverify(f)


def test_construction_from_the_scanned_witness_on_the_cubic():
    f = catalog_lookup("cubic")
    g = perturb(f, [-0.5])
    trace = tuacuctri_construct(f, [-0.5], plan=PLAN)
    # The witness is refined to the local maximum of x^3 - x/2, so the level set through v0
    # shrinks to that point.
    peak = -1.0 / math.sqrt(6.0)
    assert trace.u[0] == -2.0
    assert abs(trace.v0[0] - peak) <= 1e-3
    assert abs(trace.v[0] - peak) <= 2e-3
    assert trace.dk1 and trace.dk2 and trace.dk3
    assert trace.dk1_margin >= 1e-3
    assert min(trace.dk3_margins) >= 1e-3

    past_v = np.linspace(trace.v[0] + 1e-3, trace.w[0], 2001)
    assert np.all(g.evaluate_many(past_v.reshape(-1, 1)) < g(trace.v0))


def test_construction_from_an_explicit_triple_on_the_cubic():
    f = catalog_lookup("cubic")
    g = perturb(f, [-0.5])
    trace = tuacuctri_construct(f, [-0.5], plan=PLAN, triple=([-1.0], [0.5], [-0.3]))
    assert (trace.u[0], trace.w[0]) == (-1.0, 0.5)

    level = g([-0.3])
    roots = np.roots([1.0, 0.0, -0.5, -level])
    inside = sorted(r.real for r in roots if abs(r.imag) < 1e-9 and -1.0 < r.real < 0.5)
    assert len(inside) == 2
    assert abs(trace.v[0] - inside[-1]) <= 1e-3
    assert abs(trace.v[0] + 0.3) <= 1e-3
    assert trace.r == pytest.approx(0.8, abs=1e-3)
    extent = trace.level_points[:, 0]
    assert extent.min() == pytest.approx(inside[0], abs=1e-3)
    assert extent.max() == pytest.approx(inside[-1], abs=1e-3)

    assert trace.dk1 and trace.dk2 and trace.dk3
    assert trace.dk1_margin >= 1e-3
    assert min(trace.dk3_margins) >= 1e-3


@pytest.mark.parametrize("f", catalog_entries(), ids=lambda f: f.name)
def test_membership_accepts_every_oracle_subgradient(f):
    points = sample_in_box(f.default_box, 200, seed=2024, stream=2)
    for x in [*points, *(np.asarray(k) for k in kinks_in_box(f, f.default_box))]:
        rows = f.exact_subgradients(x)
        assert rows is not None
        for row in rows:
            assert frechet_membership(f, x, row).passed, (x, row)


@pytest.mark.parametrize("f", [f for f in catalog_entries() if not f.kinks], ids=lambda f: f.name)
def test_membership_rejects_shifted_gradients(f):
    points = sample_in_box(f.default_box, 200, seed=2024, stream=2)
    for x in points:
        shifted = f.exact_subgradients(x)[0] + 0.2 * np.eye(f.dim)[0]
        assert not frechet_membership(f, x, shifted).passed, x


def test_membership_rejects_beyond_the_kink():
    f = catalog_lookup("abs")
    assert not frechet_membership(f, [0.0], [1.2]).passed
    assert not frechet_membership(f, [0.0], [-1.2]).passed

    negated = catalog_lookup("neg_abs")
    assert negated.exact_subgradients([0.0]).shape == (0, 1)
    assert not frechet_membership(negated, [0.0], [0.0]).passed


def test_full_runs_are_deterministic():
    config = RunConfig.build(
        function="cubic",
        checks=["quasiconvex", "cond-b", "robust-primal"],
        alpha=0.5,
        alpha_star=["pairs"],
        lemmas=[{"lemma": "tuacuctri", "v_star": [-0.5]}],
    )
    assert run_suite(config).reproducible_dump() == run_suite(config).reproducible_dump()
