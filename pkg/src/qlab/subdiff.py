from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from ._utils import json_float, json_vector
from .catalog import FunctionHandle, GroundTruth
from .exceptions import AllSamplesInfinite, DimensionError, PointOutsideDomain, UserError
from .exprlang import EvalStats
from .geometry import Box, Point, as_point, unit_directions
from .logger import logger

SMOOTHNESS_TOL = 1e-3


def fd_step(x: Point) -> float:
    return 1e-5 * (1.0 + float(np.linalg.norm(x)))


def fd_gradient(
    f: FunctionHandle,
    x: npt.ArrayLike,
    h: float | None = None,
    smoothness_tol: float = SMOOTHNESS_TOL,
) -> Point | None:
    """Central-difference gradient of f at x, or None where it is undefined.

    Undefined means a stencil value is +inf, or the two one-sided slopes along some coordinate
    differ by more than `smoothness_tol * (1 + |central slope|)` (a kink).
    """
    point = as_point(x, f.dim)
    step = fd_step(point) if h is None else h
    n = f.dim
    stencil = np.vstack([point, point + step * np.eye(n), point - step * np.eye(n)])
    values = f.evaluate_many(stencil)
    if not np.all(np.isfinite(values)):
        return None
    center, plus, minus = values[0], values[1 : n + 1], values[n + 1 :]
    central = (plus - minus) / (2 * step)
    right = (plus - center) / step
    left = (center - minus) / step
    if np.any(np.abs(right - left) > smoothness_tol * (1.0 + np.abs(central))):
        return None
    return central


@dataclass(frozen=True)
class MembershipConfig:
    """Scale of the numerical Fréchet membership test."""

    r0: float = 0.1
    """Largest sphere radius."""

    levels: int = 12
    """Radii are r0 * 2^-j for j = 0..levels."""

    tol: float = 1e-6

    directions: int = 16
    """Random directions on top of the ± axes (n ≥ 2); 1D always uses ±1."""

    seed: int = 0


@dataclass(frozen=True)
class MembershipVerdict:
    passed: bool
    """True means "no rejection at this scale", never a proof of membership."""

    witness: Point | None = None
    """A sampled y whose difference quotient stays below −tol; set iff rejected."""

    worst_quotient: float = float("inf")

    def export(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "witness": json_vector(self.witness) if self.witness is not None else None,
            "worst_quotient": json_float(self.worst_quotient),
        }


def frechet_membership(
    f: FunctionHandle,
    x: npt.ArrayLike,
    x_star: npt.ArrayLike,
    cfg: MembershipConfig | None = None,
) -> MembershipVerdict:
    """Test x* ∈ ∂̂φ(x) at finite scale.

    The difference quotient q(y) = (φ(y) − φ(x) − ⟨x*, y − x⟩)/‖y − x‖ is sampled on spheres of
    radius r0·2^-j. Along each direction the quotients are also extrapolated to r → 0 (the first-
    and second-order terms in r are eliminated between consecutive radii), so smooth functions with
    negative curvature are not rejected at finite radii. A direction rejects when both the raw
    quotients and the extrapolated ones at the two smallest radii fall below −tol.

    Raises:
        PointOutsideDomain: φ(x) = +inf.
        AllSamplesInfinite: every sampled neighbour lies outside dom φ.
    """
    cfg = cfg or MembershipConfig()
    point = as_point(x, f.dim)
    star = as_point(x_star, f.dim)
    fx = f(point)
    if not np.isfinite(fx):
        raise PointOutsideDomain(f"{f.name} is +inf at {point.tolist()}")
    dirs = unit_directions(f.dim, cfg.directions, cfg.seed)
    radii = cfg.r0 * 0.5 ** np.arange(cfg.levels + 1)
    offsets = radii[:, None, None] * dirs[None, :, :]
    ys = point[None, None, :] + offsets
    values = f.evaluate_many(ys.reshape(-1, f.dim)).reshape(len(radii), len(dirs))
    if not np.any(np.isfinite(values)):
        raise AllSamplesInfinite(f"no finite values of {f.name} around {point.tolist()}")
    distances = np.linalg.norm(offsets, axis=2)
    with np.errstate(all="ignore"):
        q = (values - fx - offsets @ star) / distances
    q = np.where(np.isfinite(values), q, np.inf)
    extrapolated = np.full_like(q, np.inf)
    extrapolated[2:] = (8 * q[2:] - 6 * q[1:-1] + q[:-2]) / 3
    extrapolated = np.where(np.isnan(extrapolated), np.inf, extrapolated)
    last = slice(-2, None)
    raw_low = q[last].min(axis=0)
    ext_low = extrapolated[last].min(axis=0)
    score = np.maximum(raw_low, ext_low)
    worst = int(np.argmin(score))
    if score[worst] < -cfg.tol:
        return MembershipVerdict(
            passed=False, witness=ys[-1, worst].copy(), worst_quotient=float(score[worst])
        )
    return MembershipVerdict(passed=True, worst_quotient=float(score.min()))


@dataclass(frozen=True, eq=False)
class SubgradientSample:
    """A finite sample of ∂̂φ(base_point), one subgradient per row."""

    base_point: Point
    subgradients: npt.NDArray[np.float64]
    exact: bool
    """Produced by an exact catalog oracle."""

    empty_certified: bool = False
    """The oracle certifies ∂̂φ(x) = ∅. Only then may an exact sample be empty."""

    def __post_init__(self) -> None:
        if self.empty_certified and (self.subgradients.shape[0] or not self.exact):
            raise UserError("only exact, empty samples can be certified empty")

    @property
    def is_empty(self) -> bool:
        return self.subgradients.shape[0] == 0

    @property
    def skipped(self) -> bool:
        """Empty without certification: checkers must not treat this as evidence."""
        return self.is_empty and not self.empty_certified

    def translated(self, v_star: Point) -> SubgradientSample:
        return SubgradientSample(
            base_point=self.base_point,
            subgradients=self.subgradients + v_star[None, :],
            exact=self.exact,
            empty_certified=self.empty_certified,
        )

    def export(self) -> dict[str, Any]:
        return {
            "base_point": json_vector(self.base_point),
            "subgradients": [json_vector(g) for g in self.subgradients],
            "exact": self.exact,
            "empty_certified": self.empty_certified,
        }


@dataclass(frozen=True, eq=False)
class PerturbedFunction(FunctionHandle):
    """φ_{v*}: x ↦ φ(x) + ⟨v*, x⟩."""

    base: FunctionHandle
    v_star: Point
    name: str = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", f"{self.base.name} + <v*, x>")

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.base.dim

    def _evaluate(self, points: Point, stats: EvalStats) -> npt.NDArray[np.float64]:
        return self.base.evaluate_many(points, stats) + points @ self.v_star

    @property
    def default_box(self) -> Box:
        return self.base.default_box

    @property
    def labels(self) -> GroundTruth | None:
        return None

    @property
    def kinks(self) -> tuple[tuple[float, ...], ...]:
        return self.base.kinks

    @property
    def has_exact_oracle(self) -> bool:
        return self.base.has_exact_oracle

    def exact_subgradients(self, x: Point) -> npt.NDArray[np.float64] | None:
        base = self.base.exact_subgradients(x)
        if base is None:
            return None
        return base + self.v_star[None, :]

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out["base"] = self.base.name
        out["v_star"] = json_vector(self.v_star)
        return out


def perturb(f: FunctionHandle, v_star: npt.ArrayLike) -> PerturbedFunction:
    """φ + ⟨v*, ·⟩. Perturbing a perturbed function folds the vectors together.

    Raises:
        DimensionError: when dim(v*) differs from f.dim.
    """
    star = np.atleast_1d(np.asarray(v_star, dtype=float)).ravel()
    if star.shape[0] != f.dim:
        raise DimensionError(f"v* has dimension {star.shape[0]}, {f.name} has {f.dim}")
    if isinstance(f, PerturbedFunction):
        return PerturbedFunction(base=f.base, v_star=f.v_star + star)
    return PerturbedFunction(base=f, v_star=star)


def subgradients_at(
    f: FunctionHandle, x: npt.ArrayLike, cfg: MembershipConfig | None = None
) -> SubgradientSample:
    """A finite sample of ∂̂φ(x).

    Exact oracle when f has one. Otherwise the finite-difference gradient, kept only if it passes
    the membership test; a kink or a rejected gradient yields an empty, non-certified sample.

    Raises:
        PointOutsideDomain: φ(x) = +inf.
    """
    point = as_point(x, f.dim)
    if isinstance(f, PerturbedFunction):
        return subgradients_at(f.base, point, cfg).translated(f.v_star)
    if not np.isfinite(f(point)):
        raise PointOutsideDomain(f"{f.name} is +inf at {point.tolist()}")
    empty = np.empty((0, f.dim))
    if f.has_exact_oracle:
        exact = f.exact_subgradients(point)
        if exact is None:
            return SubgradientSample(point, empty, exact=False)
        return SubgradientSample(point, exact, exact=True, empty_certified=exact.shape[0] == 0)
    gradient = fd_gradient(f, point)
    if gradient is None:
        return SubgradientSample(point, empty, exact=False)
    try:
        verdict = frechet_membership(f, point, gradient, cfg)
    except AllSamplesInfinite:
        return SubgradientSample(point, empty, exact=False)
    if not verdict.passed:
        logger.debug(f"Finite-difference gradient of {f.name} at {point.tolist()} rejected")
        return SubgradientSample(point, empty, exact=False)
    return SubgradientSample(point, gradient.reshape(1, -1), exact=False)
