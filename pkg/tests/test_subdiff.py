from __future__ import annotations

import numpy as np
import pytest

from qlab.catalog import catalog_lookup, from_expression
from qlab.exceptions import AllSamplesInfinite, DimensionError, PointOutsideDomain, UserError
from qlab.subdiff import (
    MembershipConfig,
    PerturbedFunction,
    SubgradientSample,
    fd_gradient,
    frechet_membership,
    perturb,
    subgradients_at,
)


def test_fd_gradient_of_smooth_functions():
    gradient = fd_gradient(catalog_lookup("quadratic"), [1.5])
    assert gradient is not None
    assert gradient.tolist() == pytest.approx([3.0], abs=1e-6)

    gradient = fd_gradient(catalog_lookup("saddle"), [1.0, 2.0])
    assert gradient is not None
    assert gradient.tolist() == pytest.approx([2.0, -4.0], abs=1e-6)


def test_fd_gradient_is_undefined_at_kinks_and_domain_edges():
    assert fd_gradient(catalog_lookup("abs"), [0.0]) is None
    assert fd_gradient(from_expression("log(x1)", 1), [1e-9]) is None


def test_membership_accepts_subgradients_at_a_kink():
    f = catalog_lookup("abs")
    assert frechet_membership(f, [0.0], [0.5]).passed
    assert frechet_membership(f, [0.0], [1.0]).passed


def test_membership_rejects_points_outside_the_subdifferential():
    verdict = frechet_membership(catalog_lookup("abs"), [0.0], [1.2])
    assert not verdict.passed
    assert verdict.witness is not None
    assert verdict.witness[0] > 0.0
    assert verdict.worst_quotient < -1e-6


def test_neg_abs_has_no_subgradient_at_zero():
    f = catalog_lookup("neg_abs")
    assert not frechet_membership(f, [0.0], [0.0]).passed
    assert not frechet_membership(f, [0.0], [1.0]).passed


def test_membership_tolerates_negative_curvature():
    concave = from_expression("-(x1^2)", 1)
    assert frechet_membership(concave, [1.0], [-2.0]).passed
    assert not frechet_membership(concave, [1.0], [-1.5]).passed


def test_membership_on_a_two_dimensional_saddle():
    f = catalog_lookup("saddle")
    assert frechet_membership(f, [1.0, 1.0], [2.0, -2.0]).passed
    assert not frechet_membership(f, [1.0, 1.0], [2.2, -2.0]).passed


def test_membership_errors():
    with pytest.raises(PointOutsideDomain):
        frechet_membership(from_expression("log(x1)", 1), [-1.0], [0.0])
    isolated = from_expression("piecewise(x1 < 0: inf; x1 > 0: inf; 0)", 1)
    with pytest.raises(AllSamplesInfinite):
        frechet_membership(isolated, [0.0], [0.0])


def test_membership_is_seeded():
    f = catalog_lookup("norm2d")
    cfg = MembershipConfig(seed=3)
    first = frechet_membership(f, [0.0, 0.0], [0.9, 0.0], cfg)
    second = frechet_membership(f, [0.0, 0.0], [0.9, 0.0], cfg)
    assert first == second
    assert first.passed


def test_exact_samples_come_from_the_oracle():
    sample = subgradients_at(catalog_lookup("abs"), [0.0])
    assert sample.exact
    assert sample.subgradients.shape == (11, 1)
    assert not sample.skipped


def test_certified_empty_sample():
    sample = subgradients_at(catalog_lookup("neg_abs"), [0.0])
    assert sample.is_empty
    assert sample.empty_certified
    assert not sample.skipped


def test_finite_difference_samples_for_expressions():
    sample = subgradients_at(from_expression("x1^2 + x2^2", 2), [1.0, 2.0])
    assert not sample.exact
    assert sample.subgradients.tolist()[0] == pytest.approx([2.0, 4.0], abs=1e-6)

    kink = subgradients_at(from_expression("abs(x1)", 1), [0.0])
    assert kink.is_empty
    assert kink.skipped


def test_subgradients_outside_the_domain():
    with pytest.raises(PointOutsideDomain):
        subgradients_at(from_expression("sqrt(x1)", 1), [-4.0])


def test_only_exact_empty_samples_can_be_certified():
    with pytest.raises(UserError):
        SubgradientSample(np.zeros(1), np.ones((1, 1)), exact=True, empty_certified=True)
    with pytest.raises(UserError):
        SubgradientSample(np.zeros(1), np.empty((0, 1)), exact=False, empty_certified=True)


def test_perturbation_adds_a_linear_term():
    f = catalog_lookup("quadratic")
    g = perturb(f, [0.5])
    assert isinstance(g, PerturbedFunction)
    assert g([2.0]) == f([2.0]) + 1.0
    assert g.describe()["v_star"] == [0.5]


def test_perturbations_fold_together():
    f = catalog_lookup("cubic")
    g = perturb(perturb(f, [0.5]), [0.25])
    assert g.base is f
    assert g.v_star.tolist() == [0.75]


def test_perturbation_dimension():
    with pytest.raises(DimensionError):
        perturb(catalog_lookup("saddle"), [1.0])


def test_perturbed_subgradients_are_translated():
    sample = subgradients_at(perturb(catalog_lookup("abs"), [0.5]), [1.0])
    assert sample.subgradients.tolist() == [[1.5]]
    assert sample.exact
