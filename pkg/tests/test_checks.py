from __future__ import annotations

import math

import numpy as np
import pytest

from qlab.catalog import catalog_lookup, from_expression
from qlab.checks import (
    RobustParams,
    check_condition_b,
    check_lsc_sampled,
    check_monotone,
    check_quasiconvex_primal,
    check_quasimonotone,
    check_robust_condition_b,
    check_robust_pairs,
    check_robust_primal,
    robust_perturbations,
)
from qlab.exceptions import DimensionError, UserError
from qlab.geometry import Box, SamplePlan
from qlab.verdict import (
    CheckStatus,
    CheckVerdict,
    ConditionBViolation,
    LscViolation,
    MonotoneViolation,
    PairsViolation,
    QuasimonotoneViolation,
    RobustPrimalViolation,
    SegmentViolation,
    exceeds,
    strict_tol,
)


def test_strict_tolerance():
    assert strict_tol(1.0, -2.0) == pytest.approx(3e-9)
    assert strict_tol(math.inf, 0.0) == pytest.approx(1e-9)
    assert exceeds(math.inf, 1.0)
    assert not exceeds(1.0, math.inf)
    assert not exceeds(math.nan, 0.0)
    assert not exceeds(1.0 + 1e-12, 1.0)
    assert exceeds(1.0 + 1e-6, 1.0)


def test_verdicts_carry_a_witness_exactly_when_violated():
    with pytest.raises(UserError):
        CheckVerdict(CheckStatus.VIOLATED, worst_margin=-1.0)
    with pytest.raises(UserError):
        CheckVerdict(CheckStatus.SATISFIED, witness=LscViolation(
            np.zeros(1), np.ones(1), 1.0, 0.0, 0.1
        ))


@pytest.mark.parametrize("name", ["quadratic", "linear", "abs", "cubic", "step", "norm2d"])
def test_primal_satisfied_on_quasiconvex_members(name: str, small_plan: SamplePlan):
    f = catalog_lookup(name)
    verdict = check_quasiconvex_primal(f, f.default_box, small_plan)
    assert verdict.status == CheckStatus.SATISFIED
    assert verdict.witness is None
    assert verdict.pairs_scanned > 0


@pytest.mark.parametrize("name", ["neg_abs", "saddle"])
def test_primal_violated_with_a_verifiable_witness(name: str, small_plan: SamplePlan):
    f = catalog_lookup(name)
    verdict = check_quasiconvex_primal(f, f.default_box, small_plan)
    assert verdict.status == CheckStatus.VIOLATED
    assert isinstance(verdict.witness, SegmentViolation)
    assert verdict.witness.reverify(f)
    assert verdict.worst_margin < 0
    assert 0.0 < verdict.witness.lam < 1.0
    exported = verdict.export()
    assert exported["status"] == "violated"
    assert exported["witness"]["kind"] == "segment"


def test_primal_is_reproducible(small_plan: SamplePlan):
    f = catalog_lookup("neg_abs")
    first = check_quasiconvex_primal(f, f.default_box, small_plan)
    second = check_quasiconvex_primal(f, f.default_box, small_plan)
    assert first.export() == second.export()


def test_primal_skips_points_outside_the_domain(small_plan: SamplePlan):
    f = from_expression("piecewise(x1 < 0: inf; x1^2)", 1)
    verdict = check_quasiconvex_primal(f, Box.interval(-1.0, 1.0), small_plan)
    assert verdict.status == CheckStatus.SATISFIED
    assert verdict.points_skipped > 0


def test_box_dimension_must_match(small_plan: SamplePlan):
    with pytest.raises(DimensionError):
        check_quasiconvex_primal(catalog_lookup("saddle"), Box.interval(-1.0, 1.0), small_plan)


@pytest.mark.parametrize(
    "name, status",
    [
        ("quadratic", CheckStatus.SATISFIED),
        ("abs", CheckStatus.SATISFIED),
        ("norm2d", CheckStatus.SATISFIED),
        ("neg_abs", CheckStatus.VIOLATED),
        ("saddle", CheckStatus.VIOLATED),
    ],
)
def test_condition_b(name: str, status: CheckStatus, small_plan: SamplePlan):
    f = catalog_lookup(name)
    verdict = check_condition_b(f, f.default_box, small_plan)
    assert verdict.status == status
    if status == CheckStatus.VIOLATED:
        assert isinstance(verdict.witness, ConditionBViolation)
        assert verdict.witness.reverify(f)


@pytest.mark.parametrize(
    "name, status",
    [
        ("quadratic", CheckStatus.SATISFIED),
        ("cubic", CheckStatus.SATISFIED),
        ("neg_abs", CheckStatus.VIOLATED),
        ("saddle", CheckStatus.VIOLATED),
    ],
)
def test_quasimonotone(name: str, status: CheckStatus, small_plan: SamplePlan):
    f = catalog_lookup(name)
    verdict = check_quasimonotone(f, f.default_box, small_plan)
    assert verdict.status == status
    if status == CheckStatus.VIOLATED:
        assert isinstance(verdict.witness, QuasimonotoneViolation)
        assert verdict.witness.reverify(f)


def test_monotone_separates_convex_from_quasiconvex(small_plan: SamplePlan):
    quadratic = catalog_lookup("quadratic")
    assert check_monotone(quadratic, quadratic.default_box, small_plan).satisfied

    cubic = catalog_lookup("cubic")
    verdict = check_monotone(cubic, cubic.default_box, small_plan)
    assert verdict.violated
    assert isinstance(verdict.witness, MonotoneViolation)
    assert verdict.witness.reverify(cubic)


def test_lsc(small_plan: SamplePlan):
    step = catalog_lookup("step")
    assert check_lsc_sampled(step, step.default_box, small_plan).satisfied

    upper_step = from_expression("piecewise(x1 < 0: 0; 1)", 1)
    verdict = check_lsc_sampled(upper_step, upper_step.default_box, small_plan)
    assert verdict.violated
    assert isinstance(verdict.witness, LscViolation)
    assert verdict.witness.reverify(upper_step)


def test_robust_params():
    rp = RobustParams(0.5, direction_count=2, magnitude_count=4)
    magnitudes = rp.magnitudes()
    assert list(magnitudes) == sorted(magnitudes, reverse=True)
    assert magnitudes.max() < 0.5
    assert magnitudes.min() > 0.0
    perturbations = list(robust_perturbations(1, rp, seed=42))
    assert len(perturbations) == 8
    assert perturbations[0][0] == -perturbations[1][0]
    with pytest.raises(UserError):
        RobustParams(0.0)
    with pytest.raises(UserError):
        RobustParams(math.inf)


def test_robust_primal_on_slanted_sine(small_plan: SamplePlan):
    f = catalog_lookup("slanted_sine")
    below = check_robust_primal(f, f.default_box, RobustParams(0.9), small_plan)
    assert below.satisfied

    above = check_robust_primal(f, f.default_box, RobustParams(1.1), small_plan)
    assert above.violated
    witness = above.witness
    assert isinstance(witness, RobustPrimalViolation)
    assert float(np.linalg.norm(witness.v_star)) < 1.1
    assert witness.v_star[0] < 0
    assert witness.reverify(f)


def test_robust_primal_on_cubic(small_plan: SamplePlan):
    f = catalog_lookup("cubic")
    verdict = check_robust_primal(f, f.default_box, RobustParams(0.05), small_plan)
    assert verdict.violated
    assert verdict.witness is not None and verdict.witness.reverify(f)


def test_robust_condition_b(small_plan: SamplePlan):
    quadratic = catalog_lookup("quadratic")
    assert check_robust_condition_b(quadratic, quadratic.default_box, 8.0, small_plan).satisfied

    cubic = catalog_lookup("cubic")
    verdict = check_robust_condition_b(cubic, cubic.default_box, 0.5, small_plan)
    assert verdict.violated
    assert isinstance(verdict.witness, ConditionBViolation)
    assert verdict.witness.reverify(cubic)


def test_robust_pairs(small_plan: SamplePlan):
    quadratic = catalog_lookup("quadratic")
    assert check_robust_pairs(quadratic, quadratic.default_box, 8.0, small_plan).satisfied

    cubic = catalog_lookup("cubic")
    verdict = check_robust_pairs(cubic, cubic.default_box, 0.5, small_plan)
    assert verdict.violated
    assert isinstance(verdict.witness, PairsViolation)
    assert verdict.witness.alpha == 0.5
    assert verdict.witness.reverify(cubic)


def test_robust_checks_reject_bad_alpha(small_plan: SamplePlan):
    f = catalog_lookup("cubic")
    with pytest.raises(UserError):
        check_robust_condition_b(f, f.default_box, -1.0, small_plan)
    with pytest.raises(UserError):
        check_robust_pairs(f, f.default_box, math.nan, small_plan)
