from __future__ import annotations

import abc
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Union

import numpy as np
import numpy.typing as npt

from . import exprlang
from .exceptions import DimensionError, UnknownFunction, UserError
from .exprlang import EvalStats, Expr
from .geometry import Box, Point, unit_directions

AlphaLabel = Union[float, Literal["cap", "unlabeled"]]
"""A robustness label: a nonnegative number, "cap" (robust for every tested α), or "unlabeled"."""

SET_SAMPLE_POINTS = 11
"""Set-valued oracles are discretized with 9 interior points plus both endpoints."""


@dataclass(frozen=True)
class GroundTruth:
    """Certified property labels of a catalog member."""

    lsc: bool
    quasiconvex: bool
    convex: bool
    alpha_star: AlphaLabel
    provenance: str
    """Names the oracle (or the implication) the labels were derived with."""

    def __post_init__(self) -> None:
        if self.convex and not self.quasiconvex:
            raise UserError("convex functions are quasiconvex")
        if self.convex and self.alpha_star != "cap":
            raise UserError("convex functions are robustly quasiconvex for every α")
        if isinstance(self.alpha_star, float):
            if self.alpha_star < 0:
                raise UserError("alpha_star must be nonnegative")
            if self.alpha_star > 0 and not self.quasiconvex:
                raise UserError("alpha_star > 0 implies quasiconvex")

    def export(self) -> dict[str, Any]:
        return {
            "lsc": self.lsc,
            "quasiconvex": self.quasiconvex,
            "convex": self.convex,
            "alpha_star": self.alpha_star,
            "provenance": self.provenance,
        }


class FunctionHandle(abc.ABC):
    """An extended-real function φ: R^n → ]−∞, +∞]. +∞ marks points outside dom φ."""

    name: str
    dim: int

    @abc.abstractmethod
    def _evaluate(self, points: Point, stats: EvalStats) -> npt.NDArray[np.float64]:
        pass

    @property
    def default_box(self) -> Box:
        return Box.cube(self.dim, -2.0, 2.0)

    @property
    def labels(self) -> GroundTruth | None:
        return None

    @property
    def kinks(self) -> tuple[tuple[float, ...], ...]:
        """Known nonsmooth points. The dual checkers always sample these when they are in the
        box."""
        return ()

    @property
    def has_exact_oracle(self) -> bool:
        return False

    def exact_subgradients(self, x: Point) -> npt.NDArray[np.float64] | None:
        """Rows of the exact (sampled) Fréchet subdifferential at x.

        An empty (0, n) array certifies ∂̂φ(x) = ∅. None means "unknown": either there is no
        oracle, or the oracle declines to decide at this point.
        """
        return None

    def evaluate_many(
        self, points: npt.ArrayLike, stats: EvalStats | None = None
    ) -> npt.NDArray[np.float64]:
        """Values at each row of `points`; NaN and −∞ come back as +∞ and are counted."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, self.dim) if self.dim == 1 else pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DimensionError(
                f"{self.name} has dimension {self.dim}, got points of shape {pts.shape}"
            )
        local = stats if stats is not None else EvalStats()
        with np.errstate(all="ignore"):
            values = np.asarray(self._evaluate(pts, local), dtype=float)
        nans = np.isnan(values)
        if nans.any():
            local.nan_converted += int(nans.sum())
            values = np.where(nans, np.inf, values)
        neg_inf = np.isneginf(values)
        if neg_inf.any():
            local.neg_inf_converted += int(neg_inf.sum())
            values = np.where(neg_inf, np.inf, values)
        return values

    def __call__(self, x: npt.ArrayLike) -> float:
        point = np.asarray(x, dtype=float).ravel()
        if point.shape[0] != self.dim:
            raise DimensionError(f"{self.name} has dimension {self.dim}, got {point.shape[0]}")
        return float(self.evaluate_many(point.reshape(1, -1))[0])

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "default_box": str(self.default_box),
            "labels": self.labels.export() if self.labels else None,
        }


@dataclass(frozen=True, eq=False)
class CatalogFunction(FunctionHandle):
    """A ground-truth function with an exact subdifferential oracle."""

    name: str
    dim: int
    formula: str
    """Human-readable definition, also a valid expression of the expression language."""

    evaluator: Callable[[Point], npt.NDArray[np.float64]]
    subgradient_oracle: Callable[[Point], npt.NDArray[np.float64] | None]
    ground_truth: GroundTruth
    box: Box
    kink_points: tuple[tuple[float, ...], ...] = ()

    def _evaluate(self, points: Point, stats: EvalStats) -> npt.NDArray[np.float64]:
        return self.evaluator(points)

    @property
    def default_box(self) -> Box:
        return self.box

    @property
    def labels(self) -> GroundTruth:
        return self.ground_truth

    @property
    def kinks(self) -> tuple[tuple[float, ...], ...]:
        return self.kink_points

    @property
    def has_exact_oracle(self) -> bool:
        return True

    def exact_subgradients(self, x: Point) -> npt.NDArray[np.float64] | None:
        point = np.asarray(x, dtype=float).ravel()
        if point.shape[0] != self.dim:
            raise DimensionError(f"{self.name} has dimension {self.dim}, got {point.shape[0]}")
        result = self.subgradient_oracle(point)
        if result is None:
            return None
        return np.asarray(result, dtype=float).reshape(-1, self.dim)

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out["formula"] = self.formula
        out["kinks"] = [list(k) for k in self.kink_points]
        return out


@dataclass(frozen=True, eq=False)
class ExpressionFunction(FunctionHandle):
    """A user-defined function from the expression language. No oracle: subgradients come from
    finite differences checked for Fréchet membership."""

    expr: Expr
    name: str = "expression"
    source: str = field(default="")

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.expr.dim

    def _evaluate(self, points: Point, stats: EvalStats) -> npt.NDArray[np.float64]:
        return exprlang.evaluate_many(self.expr, points, stats)

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out["expression"] = exprlang.format_expr(self.expr)
        return out


def from_expression(text: str, dim: int, name: str | None = None) -> ExpressionFunction:
    """Parse `text` over x1..x{dim} and wrap it as a function handle."""
    expr = exprlang.parse(text, dim)
    return ExpressionFunction(expr=expr, name=name or text, source=text)


def _interval_sample(lo: float, hi: float) -> npt.NDArray[np.float64]:
    return np.linspace(lo, hi, SET_SAMPLE_POINTS).reshape(-1, 1)


def _col(points: Point, i: int = 0) -> npt.NDArray[np.float64]:
    return points[:, i]


def _abs_oracle(x: Point) -> npt.NDArray[np.float64]:
    if x[0] == 0.0:
        return _interval_sample(-1.0, 1.0)
    return np.array([[math.copysign(1.0, x[0])]])


def _neg_abs_oracle(x: Point) -> npt.NDArray[np.float64]:
    if x[0] == 0.0:
        return np.empty((0, 1))
    return np.array([[-math.copysign(1.0, x[0])]])


def _sqrt_abs_oracle(x: Point) -> npt.NDArray[np.float64]:
    if x[0] == 0.0:
        # ∂̂ = R here; the sample is a bounded window of it.
        return _interval_sample(-4.0, 4.0)
    return np.array([[math.copysign(0.5 / math.sqrt(abs(x[0])), x[0])]])


def _step_oracle(x: Point) -> npt.NDArray[np.float64]:
    if x[0] == 0.0:
        # ∂̂ = [0, +∞) here.
        return _interval_sample(0.0, 4.0)
    return np.zeros((1, 1))


_NORM_BALL_DIRECTIONS = unit_directions(2, 8, seed=0)


def _norm2d_oracle(x: Point) -> npt.NDArray[np.float64]:
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return np.vstack(
            [np.zeros((1, 2)), 0.5 * _NORM_BALL_DIRECTIONS, 1.0 * _NORM_BALL_DIRECTIONS]
        )
    return (x / norm).reshape(1, 2)


_CONVEX_PROVENANCE = "convex: slope_sign_change oracle finds no sign change on the default box"
_IMPLIED_PROVENANCE = "implied: not quasiconvex (unimodal_scan finds an interior peak)"


def _build() -> dict[str, CatalogFunction]:
    one = Box.interval(-2.0, 2.0)
    two = Box.cube(2, -2.0, 2.0)
    convex = GroundTruth(True, True, True, "cap", _CONVEX_PROVENANCE)
    members = [
        CatalogFunction(
            name="quadratic",
            dim=1,
            formula="x1^2",
            evaluator=lambda p: _col(p) ** 2,
            subgradient_oracle=lambda x: 2.0 * x.reshape(1, 1),
            ground_truth=convex,
            box=one,
        ),
        CatalogFunction(
            name="quadratic2d",
            dim=2,
            formula="x1^2 + x2^2",
            evaluator=lambda p: np.sum(p**2, axis=1),
            subgradient_oracle=lambda x: 2.0 * x.reshape(1, 2),
            ground_truth=GroundTruth(
                True, True, True, "cap", "convex: positive definite Hessian"
            ),
            box=two,
        ),
        CatalogFunction(
            name="linear",
            dim=1,
            formula="x1",
            evaluator=lambda p: _col(p).copy(),
            subgradient_oracle=lambda x: np.ones((1, 1)),
            ground_truth=convex,
            box=one,
        ),
        CatalogFunction(
            name="abs",
            dim=1,
            formula="abs(x1)",
            evaluator=lambda p: np.abs(_col(p)),
            subgradient_oracle=_abs_oracle,
            ground_truth=convex,
            box=one,
            kink_points=((0.0,),),
        ),
        CatalogFunction(
            name="neg_abs",
            dim=1,
            formula="-abs(x1)",
            evaluator=lambda p: -np.abs(_col(p)),
            subgradient_oracle=_neg_abs_oracle,
            ground_truth=GroundTruth(True, False, False, 0.0, _IMPLIED_PROVENANCE),
            box=one,
            kink_points=((0.0,),),
        ),
        CatalogFunction(
            name="cubic",
            dim=1,
            formula="x1^3",
            evaluator=lambda p: _col(p) ** 3,
            subgradient_oracle=lambda x: 3.0 * x.reshape(1, 1) ** 2,
            ground_truth=GroundTruth(
                True, True, False, 0.0, "derivative_oracle(3*x1^2) on the default box"
            ),
            box=one,
        ),
        CatalogFunction(
            name="slanted_sine",
            dim=1,
            formula="2*x1 + sin(x1)",
            evaluator=lambda p: 2.0 * _col(p) + np.sin(_col(p)),
            subgradient_oracle=lambda x: (2.0 + np.cos(x)).reshape(1, 1),
            ground_truth=GroundTruth(
                True, True, False, 1.0, "derivative_oracle(2 + cos(x1)) on the default box"
            ),
            box=Box.interval(-10.0, 10.0),
        ),
        CatalogFunction(
            name="sqrt_abs",
            dim=1,
            formula="sqrt(abs(x1))",
            evaluator=lambda p: np.sqrt(np.abs(_col(p))),
            subgradient_oracle=_sqrt_abs_oracle,
            ground_truth=GroundTruth(
                True,
                True,
                False,
                0.0,
                "derivative_oracle(sign(x1)/(2*sqrt(abs(x1)))) on [-R, R] gives 1/(2*sqrt(R)),"
                " which vanishes as R grows",
            ),
            box=Box.interval(-200.0, 200.0),
            kink_points=((0.0,),),
        ),
        CatalogFunction(
            name="step",
            dim=1,
            formula="piecewise(x1 <= 0: 0; 1)",
            evaluator=lambda p: np.where(_col(p) <= 0.0, 0.0, 1.0),
            subgradient_oracle=_step_oracle,
            ground_truth=GroundTruth(
                True, True, False, 0.0, "difference_oracle on the default box"
            ),
            box=one,
            kink_points=((0.0,),),
        ),
        CatalogFunction(
            name="saddle",
            dim=2,
            formula="x1^2 - x2^2",
            evaluator=lambda p: _col(p, 0) ** 2 - _col(p, 1) ** 2,
            subgradient_oracle=lambda x: np.array([[2.0 * x[0], -2.0 * x[1]]]),
            ground_truth=GroundTruth(True, False, False, 0.0, _IMPLIED_PROVENANCE),
            box=two,
        ),
        CatalogFunction(
            name="norm2d",
            dim=2,
            formula="sqrt(x1^2 + x2^2)",
            evaluator=lambda p: np.sqrt(np.sum(p**2, axis=1)),
            subgradient_oracle=_norm2d_oracle,
            ground_truth=GroundTruth(True, True, True, "cap", "convex: norm"),
            box=two,
            kink_points=((0.0, 0.0),),
        ),
    ]
    return {m.name: m for m in members}


_CATALOG = _build()


def catalog_names() -> list[str]:
    return list(_CATALOG)


def catalog_entries() -> list[CatalogFunction]:
    return list(_CATALOG.values())


def catalog_lookup(name: str) -> CatalogFunction:
    """Return the registered function called `name`.

    Raises:
        UnknownFunction: if no such member exists.
    """
    try:
        return _CATALOG[name]
    except KeyError:
        raise UnknownFunction(
            f"unknown catalog function {name!r}; known: {', '.join(_CATALOG)}"
        ) from None


def kinks_in_box(f: FunctionHandle, box: Box) -> list[Sequence[float]]:
    return [k for k in f.kinks if len(k) == box.dim and box.contains(k)]
