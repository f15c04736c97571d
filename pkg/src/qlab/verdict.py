"""Checker verdicts and the typed counterexamples attached to them.

Every witness can re-verify itself against a function by direct re-evaluation: `reverify(f)` is
True iff the defining inequality is still violated by more than the strict tolerance.
"""

from __future__ import annotations

import abc
import enum
import math
from dataclasses import dataclass
from typing import Any, Literal, Union, overload

import numpy as np
import numpy.typing as npt

from ._utils import json_float, json_vector
from .catalog import FunctionHandle
from .exceptions import UserError
from .geometry import Point, convex_combination

STRICT_RTOL = 1e-9


@overload
def strict_tol(lhs: float, rhs: float) -> float: ...


@overload
def strict_tol(
    lhs: npt.NDArray[np.float64], rhs: npt.ArrayLike
) -> npt.NDArray[np.float64]: ...


def strict_tol(lhs: Any, rhs: Any) -> Any:
    """1e-9 * (1 + max(|lhs|, |rhs|)): the margin a strict inequality must clear before it counts
    at float precision. Non-finite sides contribute nothing to the scale."""
    a = np.abs(np.asarray(lhs, dtype=float))
    b = np.abs(np.asarray(rhs, dtype=float))
    scale = np.maximum(np.where(np.isfinite(a), a, 0.0), np.where(np.isfinite(b), b, 0.0))
    out = STRICT_RTOL * (1.0 + scale)
    return float(out) if out.ndim == 0 else out


def exceeds(lhs: float, rhs: float) -> bool:
    """lhs > rhs by more than the strict tolerance. A +inf lhs exceeds any finite rhs."""
    if math.isnan(lhs) or math.isnan(rhs):
        return False
    if math.isinf(lhs) or math.isinf(rhs):
        return lhs > rhs
    return lhs - rhs > strict_tol(lhs, rhs)


class CheckStatus(str, enum.Enum):
    SATISFIED = "satisfied"
    """No violation found at this plan. Never a certificate."""

    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


class Witness(abc.ABC):
    kind: str

    @abc.abstractmethod
    def export(self) -> dict[str, Any]:
        pass

    @abc.abstractmethod
    def reverify(self, f: FunctionHandle) -> bool:
        pass


@dataclass(frozen=True, eq=False)
class SegmentViolation(Witness):
    """f(λx + (1−λ)y) > max{f(x), f(y)}."""

    x: Point
    y: Point
    lam: float
    lhs: float
    rhs: float
    kind: Literal["segment"] = "segment"

    @property
    def point(self) -> Point:
        return convex_combination(self.x, self.y, self.lam)

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": json_vector(self.x),
            "y": json_vector(self.y),
            "lambda": json_float(self.lam),
            "lhs": json_float(self.lhs),
            "rhs": json_float(self.rhs),
        }

    def reverify(self, f: FunctionHandle) -> bool:
        values = f.evaluate_many(np.vstack([self.point, self.x, self.y]))
        return exceeds(float(values[0]), float(max(values[1], values[2])))


@dataclass(frozen=True, eq=False)
class ConditionBViolation(Witness):
    """φ(y) ≤ φ(x) and ⟨x*, y − x⟩ > bound, where bound is 0 for the plain condition and
    −min{α‖y − x‖, φ(x) − φ(y)} for the robust one."""

    x: Point
    y: Point
    x_star: Point
    inner: float
    bound: float
    alpha: float | None = None
    kind: Literal["condition_b"] = "condition_b"

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": json_vector(self.x),
            "y": json_vector(self.y),
            "x_star": json_vector(self.x_star),
            "inner": json_float(self.inner),
            "bound": json_float(self.bound),
            "alpha": json_float(self.alpha) if self.alpha is not None else None,
        }

    def reverify(self, f: FunctionHandle) -> bool:
        fx, fy = f(self.x), f(self.y)
        if not (math.isfinite(fx) and math.isfinite(fy)) or fy > fx:
            return False
        inner = float(self.x_star @ (self.y - self.x))
        bound = 0.0
        if self.alpha is not None:
            bound = -min(self.alpha * float(np.linalg.norm(self.y - self.x)), fx - fy)
        return exceeds(inner, bound)


@dataclass(frozen=True, eq=False)
class QuasimonotoneViolation(Witness):
    """min{⟨x*, y − x⟩, ⟨y*, x − y⟩} > 0."""

    x: Point
    y: Point
    x_star: Point
    y_star: Point
    m: float
    kind: Literal["quasimonotone"] = "quasimonotone"

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": json_vector(self.x),
            "y": json_vector(self.y),
            "x_star": json_vector(self.x_star),
            "y_star": json_vector(self.y_star),
            "m": json_float(self.m),
        }

    def reverify(self, f: FunctionHandle) -> bool:
        if not (math.isfinite(f(self.x)) and math.isfinite(f(self.y))):
            return False
        m = min(float(self.x_star @ (self.y - self.x)), float(self.y_star @ (self.x - self.y)))
        return exceeds(m, 0.0)


@dataclass(frozen=True, eq=False)
class RobustPrimalViolation(Witness):
    """φ_{v*} violates the segment inequality for a perturbation with ‖v*‖ < α."""

    v_star: Point
    inner: SegmentViolation
    kind: Literal["robust_primal"] = "robust_primal"

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "v_star": json_vector(self.v_star),
            "norm": json_float(float(np.linalg.norm(self.v_star))),
            "inner": self.inner.export(),
        }

    def reverify(self, f: FunctionHandle) -> bool:
        from .subdiff import perturb

        return self.inner.reverify(perturb(f, self.v_star))


@dataclass(frozen=True, eq=False)
class PairsViolation(Witness):
    """min{⟨x*, y − x⟩, ⟨y*, x − y⟩} > −α‖y − x‖ but ⟨x* − y*, x − y⟩ < 0."""

    x: Point
    y: Point
    x_star: Point
    y_star: Point
    premise_margin: float
    """min{⟨x*, y − x⟩, ⟨y*, x − y⟩} + α‖y − x‖, positive when the premise holds."""

    monotone_gap: float
    alpha: float
    kind: Literal["pairs"] = "pairs"

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": json_vector(self.x),
            "y": json_vector(self.y),
            "x_star": json_vector(self.x_star),
            "y_star": json_vector(self.y_star),
            "premise_margin": json_float(self.premise_margin),
            "monotone_gap": json_float(self.monotone_gap),
            "alpha": json_float(self.alpha),
        }

    def reverify(self, f: FunctionHandle) -> bool:
        if not (math.isfinite(f(self.x)) and math.isfinite(f(self.y))):
            return False
        d = self.y - self.x
        m = min(float(self.x_star @ d), float(-(self.y_star @ d)))
        bound = -self.alpha * float(np.linalg.norm(d))
        gap = float((self.x_star - self.y_star) @ (self.x - self.y))
        return exceeds(m, bound) and exceeds(0.0, gap)


@dataclass(frozen=True, eq=False)
class MonotoneViolation(Witness):
    """⟨x* − y*, x − y⟩ < 0."""

    x: Point
    y: Point
    x_star: Point
    y_star: Point
    gap: float
    kind: Literal["monotone"] = "monotone"

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": json_vector(self.x),
            "y": json_vector(self.y),
            "x_star": json_vector(self.x_star),
            "y_star": json_vector(self.y_star),
            "gap": json_float(self.gap),
        }

    def reverify(self, f: FunctionHandle) -> bool:
        if not (math.isfinite(f(self.x)) and math.isfinite(f(self.y))):
            return False
        gap = float((self.x_star - self.y_star) @ (self.x - self.y))
        return exceeds(0.0, gap)


@dataclass(frozen=True, eq=False)
class LscViolation(Witness):
    """φ(y) < φ(x) with y at the smallest sampled radius around x."""

    x: Point
    y: Point
    value_x: float
    value_y: float
    radius: float
    kind: Literal["lsc"] = "lsc"

    def export(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "x": json_vector(self.x),
            "y": json_vector(self.y),
            "value_x": json_float(self.value_x),
            "value_y": json_float(self.value_y),
            "radius": json_float(self.radius),
        }

    def reverify(self, f: FunctionHandle) -> bool:
        return exceeds(f(self.x), f(self.y))


AnyWitness = Union[
    SegmentViolation,
    ConditionBViolation,
    QuasimonotoneViolation,
    RobustPrimalViolation,
    PairsViolation,
    MonotoneViolation,
    LscViolation,
]


@dataclass(frozen=True, eq=False)
class CheckVerdict:
    """Outcome of one checker run. Satisfied means "no violation found at this plan"."""

    status: CheckStatus
    witness: AnyWitness | None = None
    pairs_scanned: int = 0
    points_skipped: int = 0
    worst_margin: float = math.inf
    """Most negative slack observed (lhs − rhs with the sign flipped); ≤ 0 when violated."""

    nan_converted: int = 0
    note: str | None = None

    def __post_init__(self) -> None:
        if (self.status == CheckStatus.VIOLATED) != (self.witness is not None):
            raise UserError("a witness is attached exactly when the status is violated")
        if self.status == CheckStatus.VIOLATED and self.worst_margin > 0:
            raise UserError("a violated verdict has a nonpositive worst margin")

    @property
    def violated(self) -> bool:
        return self.status == CheckStatus.VIOLATED

    @property
    def satisfied(self) -> bool:
        return self.status == CheckStatus.SATISFIED

    def export(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "witness": self.witness.export() if self.witness is not None else None,
            "pairs_scanned": self.pairs_scanned,
            "points_skipped": self.points_skipped,
            "worst_margin": json_float(self.worst_margin),
            "nan_converted": self.nan_converted,
            "note": self.note,
        }
