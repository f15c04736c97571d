from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from ._utils import json_float
from .catalog import FunctionHandle
from .checks import (
    RobustParams,
    check_robust_condition_b,
    check_robust_pairs,
    check_robust_primal,
)
from .exceptions import UserError
from .geometry import Box, SamplePlan
from .logger import logger
from .verdict import CheckStatus, CheckVerdict

DEFAULT_CAP = 8.0
DEFAULT_TOL = 1e-2
DEFAULT_MAGNITUDES = 8


class AlphaMethod(str, enum.Enum):
    """Which robustness criterion the bisection uses as its predicate."""

    PRIMAL = "primal"
    """Sampled perturbations of the primal definition."""

    DUAL_B = "dual-b"
    """The robust form of condition (b)."""

    PAIRS = "pairs"
    """The pairs criterion on subgradients."""


Predicate = Callable[[float], CheckVerdict]


def robust_predicate(
    f: FunctionHandle, box: Box, method: AlphaMethod, plan: SamplePlan
) -> Predicate:
    """The checker `method` selects, as a function of α."""
    if method == AlphaMethod.PRIMAL:
        return lambda alpha: check_robust_primal(
            f,
            box,
            RobustParams(
                alpha,
                direction_count=plan.directions_per_sphere,
                magnitude_count=DEFAULT_MAGNITUDES,
            ),
            plan,
        )
    if method == AlphaMethod.DUAL_B:
        return lambda alpha: check_robust_condition_b(f, box, alpha, plan)
    return lambda alpha: check_robust_pairs(f, box, alpha, plan)


@dataclass(frozen=True)
class AlphaEstimate:
    """A bracket [lower, upper] around the supremum of valid α, found by bisection on [0, cap].

    `lower` is the largest probed α where no violation was found (0 if none), `upper` the smallest
    probed α where one was (cap if none). The supremum itself is never decided.
    """

    method: AlphaMethod
    lower: float
    upper: float
    cap: float
    tol: float
    trace: list[tuple[float, CheckStatus]] = field(default_factory=list)
    """Every probed α with the predicate outcome, in probe order."""

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def at_cap(self) -> bool:
        return self.lower == self.upper == self.cap

    @property
    def trace_is_monotone(self) -> bool:
        """No α with a Satisfied outcome lies above an α without one."""
        satisfied = [a for a, s in self.trace if s == CheckStatus.SATISFIED]
        failed = [a for a, s in self.trace if s != CheckStatus.SATISFIED]
        return not satisfied or not failed or max(satisfied) < min(failed)

    def export(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "lower": json_float(self.lower),
            "upper": json_float(self.upper),
            "cap": json_float(self.cap),
            "tol": json_float(self.tol),
            "trace": [[json_float(a), s.value] for a, s in self.trace],
        }


def bisect_alpha(
    predicate: Predicate, method: AlphaMethod, cap: float, tol: float
) -> AlphaEstimate:
    """Bisection on [0, cap]. The predicate holds when its verdict is Satisfied; Inconclusive
    counts as not holding."""
    if not (math.isfinite(cap) and cap > 0):
        raise UserError(f"cap must be positive and finite, got {cap}")
    if not (math.isfinite(tol) and tol > 0):
        raise UserError(f"tol must be positive and finite, got {tol}")
    trace: list[tuple[float, CheckStatus]] = []

    def holds(alpha: float) -> bool:
        status = predicate(alpha).status
        trace.append((alpha, status))
        if status == CheckStatus.INCONCLUSIVE:
            logger.warning(f"{method.value} predicate inconclusive at alpha={alpha}")
        return status == CheckStatus.SATISFIED

    if holds(cap):
        return AlphaEstimate(method, cap, cap, cap, tol, trace)
    lower, upper = 0.0, cap
    while upper - lower > tol:
        mid = (lower + upper) / 2
        if holds(mid):
            lower = mid
        else:
            upper = mid
    estimate = AlphaEstimate(method, lower, upper, cap, tol, trace)
    if not estimate.trace_is_monotone:
        logger.warning(f"{method.value} predicate is not monotone in alpha on this plan: {trace}")
    return estimate


def estimate_alpha_star(
    f: FunctionHandle,
    box: Box,
    method: AlphaMethod | str,
    cap: float = DEFAULT_CAP,
    tol: float = DEFAULT_TOL,
    plan: SamplePlan | None = None,
) -> AlphaEstimate:
    """Bracket the robustness modulus α* of f on `box` with the selected criterion.

    Returns [cap, cap] when the predicate already holds at cap, otherwise a bracket of width at
    most `tol`.
    """
    plan = plan or SamplePlan()
    try:
        chosen = AlphaMethod(method)
    except ValueError:
        known = ", ".join(m.value for m in AlphaMethod)
        raise UserError(f"unknown alpha* method {method!r}; known: {known}") from None
    estimate = bisect_alpha(robust_predicate(f, box, chosen, plan), chosen, cap, tol)
    logger.debug(
        f"alpha* of {f.name} by {chosen.value}: [{estimate.lower}, {estimate.upper}]"
        f" after {len(estimate.trace)} probes"
    )
    return estimate
