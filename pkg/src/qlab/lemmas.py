"""Verification harnesses for the approximate mean value theorem and the segment lemmas behind the
robustness characterizations.

Each harness realizes a limiting statement at finite scale: sequences become shrinking radii,
infima become refined grids. The returned traces record everything the verdicts were computed
from, so a reader can redo the arithmetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import optimize

from ._utils import json_float, json_vector
from .catalog import FunctionHandle
from .checks import check_quasiconvex_primal
from .exceptions import (
    DegenerateEndpoints,
    PerturbationStillQuasiconvexAtScale,
    PreconditionViolated,
    UserError,
)
from .geometry import (
    Box,
    Point,
    SamplePlan,
    SegmentNeighborhood,
    as_point,
    dyadic_lambdas,
    unit_directions,
)
from .logger import logger
from .subdiff import SMOOTHNESS_TOL, MembershipConfig, perturb, subgradients_at
from .verdict import CheckStatus, SegmentViolation, exceeds, strict_tol


class LemmaVerdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS_AT_SCALE = "fails_at_scale"
    INCONCLUSIVE = "inconclusive"
    """No usable subgradients were found where they were needed."""

    NOT_APPLICABLE = "not_applicable"
    PREMISE_UNMET = "premise_unmet"
    PRECONDITION_VIOLATED = "precondition_violated"
    NOT_FOUND_AT_SCALE = "not_found_at_scale"


def _on_segment(a: Point, b: Point, point: Point, strict: bool) -> tuple[bool, float]:
    """Whether `point` lies on [a, b] (or on ]a, b[ when strict), and its parameter t."""
    direction = b - a
    length_sq = float(direction @ direction)
    if length_sq == 0.0:
        return False, 0.0
    t = float((point - a) @ direction) / length_sq
    off = float(np.linalg.norm(point - (a + t * direction)))
    scale = 1.0 + float(max(np.linalg.norm(a), np.linalg.norm(b)))
    on_line = off <= 1e-9 * scale
    if strict:
        return on_line and 0.0 < t < 1.0, t
    tol = 1e-12
    return on_line and -tol <= t <= 1.0 + tol, t


def _finite_or_fail(f: FunctionHandle, named: dict[str, Point]) -> dict[str, float]:
    values = {name: f(p) for name, p in named.items()}
    failed = [f"phi({name}) finite" for name, v in values.items() if not math.isfinite(v)]
    if failed:
        raise PreconditionViolated(failed)
    return values


# --------------------------------------------------------------------------------------------
# Approximate mean value theorem
# --------------------------------------------------------------------------------------------

MVT_GRID = 1025
MVT_K = range(3, 13)
MVT_SCALES = (1.0, 0.5, 0.25)
MVT_TOL = 1e-6
MVT_GRID_TOL = 1e-3
"""Distance from a below which (mean_3) is not asserted."""

FD_H = 1e-6


@dataclass(frozen=True)
class MvtSample:
    k: int
    x: Point
    x_star: Point
    inner_b_minus_x: float
    inner_b_minus_a: float
    value_gap: float
    """φ(x_k) − φ(c), recorded to show φ-attentive convergence; no rate is asserted."""

    def export(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "x": json_vector(self.x),
            "x_star": json_vector(self.x_star),
            "inner_b_minus_x": json_float(self.inner_b_minus_x),
            "inner_b_minus_a": json_float(self.inner_b_minus_a),
            "value_gap": json_float(self.value_gap),
        }


@dataclass(frozen=True)
class MvtTrace:
    a: Point
    b: Point
    slope: float
    """(φ(b) − φ(a)) / ‖a − b‖."""

    c: Point
    t_c: float
    psi_c: float
    psi_grid_min: float
    samples: list[MvtSample]
    mean_1: LemmaVerdict
    mean_2: LemmaVerdict
    mean_3: LemmaVerdict
    margins: dict[str, float] = field(default_factory=dict)
    """Worst slack of each inequality over the last three scales."""

    @property
    def verdicts(self) -> dict[str, LemmaVerdict]:
        return {"mean_1": self.mean_1, "mean_2": self.mean_2, "mean_3": self.mean_3}

    def export(self) -> dict[str, Any]:
        return {
            "a": json_vector(self.a),
            "b": json_vector(self.b),
            "slope": json_float(self.slope),
            "c": json_vector(self.c),
            "t_c": json_float(self.t_c),
            "psi_c": json_float(self.psi_c),
            "psi_grid_min": json_float(self.psi_grid_min),
            "samples": [s.export() for s in self.samples],
            "verdicts": {k: v.value for k, v in self.verdicts.items()},
            "margins": {k: json_float(v) for k, v in self.margins.items()},
        }


class _Psi:
    """ψ(t) = φ(a + t(b − a)) − slope·t·‖b − a‖ on [0, 1]."""

    def __init__(self, f: FunctionHandle, a: Point, b: Point, slope: float):
        self.f = f
        self.a = a
        self.direction = b - a
        self.length = float(np.linalg.norm(self.direction))
        self.slope = slope

    def points(self, ts: npt.NDArray[np.float64]) -> Point:
        return self.a[None, :] + ts[:, None] * self.direction[None, :]

    def many(self, ts: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return self.f.evaluate_many(self.points(ts)) - self.slope * ts * self.length

    def __call__(self, t: float) -> float:
        return float(self.many(np.array([t]))[0])

    def slope_at(self, t: float) -> float:
        return (self(min(t + FD_H, 1.0)) - self(max(t - FD_H, 0.0))) / (
            min(t + FD_H, 1.0) - max(t - FD_H, 0.0)
        )

    def smooth_at(self, t: float) -> bool:
        if t - FD_H < 0.0 or t + FD_H > 1.0:
            return False
        center = self(t)
        right = (self(t + FD_H) - center) / FD_H
        left = (center - self(t - FD_H)) / FD_H
        central = (right + left) / 2
        return abs(right - left) <= SMOOTHNESS_TOL * (1.0 + abs(central))


def _minimize_psi(psi: _Psi) -> tuple[float, float, float]:
    """Returns (t_c, ψ(t_c), grid minimum). t_c ∈ [0, 1); ties on the grid go to the lowest
    index."""
    grid = np.linspace(0.0, 1.0, MVT_GRID)
    values = psi.many(grid)[:-1]
    k = int(np.argmin(values))
    t_best, psi_best = float(grid[k]), float(values[k])
    grid_min = psi_best
    lo, hi = float(grid[max(k - 1, 0)]), float(grid[k + 1])
    polished = optimize.minimize_scalar(
        psi, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    if polished.success and float(polished.x) < 1.0 and float(polished.fun) < psi_best:
        t_best, psi_best = float(polished.x), float(polished.fun)
    if psi.smooth_at(t_best):
        lo, hi = max(lo, FD_H), min(hi, 1.0 - FD_H)
        s_lo, s_hi = psi.slope_at(lo), psi.slope_at(hi)
        if lo < hi and s_lo < 0.0 < s_hi:
            root = float(optimize.brentq(psi.slope_at, lo, hi, xtol=1e-14))
            value = psi(root)
            if root < 1.0 and value <= psi_best + 1e-12 * (1.0 + abs(psi_best)):
                t_best, psi_best = root, value
    return t_best, psi_best, grid_min


def _mvt_candidates(
    f: FunctionHandle, c: Point, direction: Point, radius: float, plan: SamplePlan
) -> list[Point]:
    candidates = [c]
    directions = [direction, -direction]
    if f.dim > 1:
        directions.extend(unit_directions(f.dim, plan.directions_per_sphere, plan.seed))
    for scale in MVT_SCALES:
        candidates.extend(c + scale * radius * d for d in directions)
    for kink in f.kinks:
        k = np.asarray(kink, dtype=float)
        if k.shape[0] == f.dim and float(np.linalg.norm(k - c)) <= radius:
            candidates.append(k)
    return candidates


def mvt_verify(
    f: FunctionHandle, a: npt.ArrayLike, b: npt.ArrayLike, plan: SamplePlan | None = None
) -> MvtTrace:
    """Locate c = argmin ψ on [a, b) and check the three mean value inequalities on subgradients
    sampled in balls of radius 2^-k around c, k = 3..12.

    liminf is approximated by the minimum over the last three k. (mean_3) is asserted only when
    ‖c − a‖ exceeds 1e-3.

    Raises:
        DegenerateEndpoints: a = b.
        PreconditionViolated: φ(a) or φ(b) is +inf.
    """
    plan = plan or SamplePlan()
    pa = as_point(a, f.dim)
    pb = as_point(b, f.dim)
    if np.array_equal(pa, pb):
        raise DegenerateEndpoints(f"a and b coincide at {pa.tolist()}")
    values = _finite_or_fail(f, {"a": pa, "b": pb})
    delta = values["b"] - values["a"]
    length = float(np.linalg.norm(pb - pa))
    slope = delta / length
    psi = _Psi(f, pa, pb, slope)
    t_c, psi_c, grid_min = _minimize_psi(psi)
    c = psi.points(np.array([t_c]))[0]
    fc = f(c)
    b_minus_c = float(np.linalg.norm(pb - c))
    unit = (pb - pa) / length
    mean_3_applies = float(np.linalg.norm(c - pa)) > MVT_GRID_TOL
    tol_3 = MVT_TOL * (1.0 + abs(delta))
    membership = MembershipConfig(seed=plan.seed)

    samples: list[MvtSample] = []
    per_k: dict[int, tuple[float, float, float]] = {}
    for k in MVT_K:
        radius = 2.0**-k
        best: tuple[float, MvtSample, tuple[float, float, float]] | None = None
        for x in _mvt_candidates(f, c, unit, radius, plan):
            fx = f(x)
            if not math.isfinite(fx):
                continue
            sample = subgradients_at(f, x, membership)
            for x_star in sample.subgradients:
                to_b = float(x_star @ (pb - x))
                across = float(x_star @ (pb - pa))
                slack_1 = to_b - slope * b_minus_c
                slack_2 = across - delta
                score = min(slack_1, slack_2)
                if mean_3_applies:
                    score = min(score, -abs(slack_2))
                if best is None or score > best[0]:
                    best = (
                        score,
                        MvtSample(k, x.copy(), x_star.copy(), to_b, across, fx - fc),
                        (slack_1, slack_2, abs(slack_2)),
                    )
        if best is not None:
            samples.append(best[1])
            per_k[k] = best[2]

    tail = [per_k[k] for k in list(MVT_K)[-3:] if k in per_k]
    margins: dict[str, float] = {}
    if not tail:
        mean_1 = mean_2 = LemmaVerdict.INCONCLUSIVE
        mean_3 = LemmaVerdict.INCONCLUSIVE if mean_3_applies else LemmaVerdict.NOT_APPLICABLE
    else:
        margins["mean_1"] = min(s[0] for s in tail)
        margins["mean_2"] = min(s[1] for s in tail)
        margins["mean_3"] = -max(s[2] for s in tail)
        mean_1 = _holds(margins["mean_1"] >= -MVT_TOL)
        mean_2 = _holds(margins["mean_2"] >= -MVT_TOL)
        if mean_3_applies:
            mean_3 = _holds(-margins["mean_3"] <= tol_3)
        else:
            mean_3 = LemmaVerdict.NOT_APPLICABLE
    trace = MvtTrace(
        a=pa,
        b=pb,
        slope=slope,
        c=c,
        t_c=t_c,
        psi_c=psi_c,
        psi_grid_min=grid_min,
        samples=samples,
        mean_1=mean_1,
        mean_2=mean_2,
        mean_3=mean_3,
        margins=margins,
    )
    logger.debug(f"mvt on {f.name}: c={c.tolist()}, verdicts {trace.export()['verdicts']}")
    return trace


def _holds(ok: bool) -> LemmaVerdict:
    return LemmaVerdict.HOLDS if ok else LemmaVerdict.FAILS_AT_SCALE


# --------------------------------------------------------------------------------------------
# Three points
# --------------------------------------------------------------------------------------------

THREE_POINTS_DEPTH = 7


@dataclass(frozen=True)
class ThreePointsResult:
    verdict: LemmaVerdict
    """HOLDS when a witness was found, NOT_FOUND_AT_SCALE otherwise."""

    x_bar: Point | None
    x_bar_star: Point | None
    inner: float | None
    """⟨x̄*, w − x̄⟩."""

    points_scanned: int
    subgradients_checked: int
    points_skipped: int

    @property
    def found(self) -> bool:
        return self.x_bar is not None

    def export(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "x_bar": json_vector(self.x_bar) if self.x_bar is not None else None,
            "x_bar_star": json_vector(self.x_bar_star) if self.x_bar_star is not None else None,
            "inner": json_float(self.inner) if self.inner is not None else None,
            "points_scanned": self.points_scanned,
            "subgradients_checked": self.subgradients_checked,
            "points_skipped": self.points_skipped,
        }


def _three_point_candidates(
    f: FunctionHandle, hood: SegmentNeighborhood, lam: float, plan: SamplePlan
) -> list[Point]:
    dyadic = [hood.u + t * (hood.v - hood.u) for t in dyadic_lambdas(THREE_POINTS_DEPTH)]
    out = list(dyadic) + [hood.u, hood.v]
    out.extend(np.asarray(k, dtype=float) for k in f.kinks if len(k) == f.dim)
    directions = unit_directions(f.dim, plan.directions_per_sphere, plan.seed)
    out.extend(p + 0.5 * lam * d for p in dyadic for d in directions)
    return [p for p in out if hood.contains(p)]


def three_points_witness(
    f: FunctionHandle,
    u: npt.ArrayLike,
    v: npt.ArrayLike,
    w: npt.ArrayLike,
    lam: float,
    plan: SamplePlan | None = None,
) -> ThreePointsResult:
    """Search B_λ([u, v]) for x̄ with a subgradient x̄* such that ⟨x̄*, w − x̄⟩ > 0.

    Scan order: dyadic points of [u, v] coarse to fine, then u and v, then known kinks in the
    neighbourhood, then points offset by λ/2 from the dyadic points. The first hit is returned.

    Raises:
        PreconditionViolated: names each hypothesis (v ∈ [u, w], φ(v) > φ(u), λ > 0) that fails.
    """
    plan = plan or SamplePlan()
    pu, pv, pw = as_point(u, f.dim), as_point(v, f.dim), as_point(w, f.dim)
    failed: list[str] = []
    if not (math.isfinite(lam) and lam > 0):
        failed.append("lambda > 0")
    if not _on_segment(pu, pw, pv, strict=False)[0]:
        failed.append("v in [u, w]")
    fu, fv = f(pu), f(pv)
    if not (math.isfinite(fu) and math.isfinite(fv)):
        failed.append("phi(u), phi(v) finite")
    elif not exceeds(fv, fu):
        failed.append("phi(v) > phi(u)")
    if failed:
        raise PreconditionViolated(failed)

    hood = SegmentNeighborhood(pu, pv, lam)
    membership = MembershipConfig(seed=plan.seed)
    scanned = checked = skipped = 0
    for x in _three_point_candidates(f, hood, lam, plan):
        scanned += 1
        if not math.isfinite(f(x)):
            skipped += 1
            continue
        sample = subgradients_at(f, x, membership)
        if sample.skipped:
            skipped += 1
            continue
        for x_star in sample.subgradients:
            checked += 1
            inner = float(x_star @ (pw - x))
            if exceeds(inner, 0.0):
                return ThreePointsResult(
                    LemmaVerdict.HOLDS, x.copy(), x_star.copy(), inner, scanned, checked, skipped
                )
    logger.debug(f"three-points on {f.name}: nothing found in {scanned} points")
    return ThreePointsResult(
        LemmaVerdict.NOT_FOUND_AT_SCALE, None, None, None, scanned, checked, skipped
    )


# --------------------------------------------------------------------------------------------
# Radial limit
# --------------------------------------------------------------------------------------------

RADIAL_J = range(4, 21)


@dataclass(frozen=True)
class RadialLimitResult:
    verdict: LemmaVerdict
    ts: list[float]
    deficits: list[float]
    """φ(v + t_j(u − v)) − φ(v)."""

    observed_limit: float
    """φ at the smallest t."""

    target: float
    lim_tol: float
    limit_matches: bool
    """Whether the tail reaches φ(v), reported even when the hypothesis φ(v) ≥ φ(u) fails."""

    def export(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "ts": [json_float(t) for t in self.ts],
            "deficits": [json_float(d) for d in self.deficits],
            "observed_limit": json_float(self.observed_limit),
            "target": json_float(self.target),
            "lim_tol": json_float(self.lim_tol),
            "limit_matches": self.limit_matches,
        }


def radial_limit_check(
    f: FunctionHandle, u: npt.ArrayLike, v: npt.ArrayLike
) -> RadialLimitResult:
    """Check lim_{t↓0} φ(v + t(u − v)) = φ(v) on t_j = 2^-j, j = 4..20.

    Holds iff min(|d_J|, |2d_J − d_{J−1}|) ≤ 1e-6·(1 + |φ(v)|), i.e. the last deficit or its linear
    extrapolation to t = 0 vanishes. When φ(v) < φ(u) the verdict is PRECONDITION_VIOLATED and the
    observed limit is still reported.

    Raises:
        PreconditionViolated: u = v, or φ is +inf at u, v or on the sampled tail.
    """
    pu, pv = as_point(u, f.dim), as_point(v, f.dim)
    if np.array_equal(pu, pv):
        raise PreconditionViolated(["u != v"])
    values = _finite_or_fail(f, {"u": pu, "v": pv})
    ts = 0.5 ** np.array(list(RADIAL_J), dtype=float)
    tail = f.evaluate_many(pv[None, :] + ts[:, None] * (pu - pv)[None, :])
    if not np.all(np.isfinite(tail)):
        raise PreconditionViolated(["phi finite on ]v, u]"])
    target = values["v"]
    deficits = tail - target
    lim_tol = 1e-6 * (1.0 + abs(target))
    extrapolated = 2 * deficits[-1] - deficits[-2]
    matches = bool(min(abs(deficits[-1]), abs(extrapolated)) <= lim_tol)
    if target < values["u"]:
        verdict = LemmaVerdict.PRECONDITION_VIOLATED
    else:
        verdict = _holds(matches)
    return RadialLimitResult(
        verdict=verdict,
        ts=ts.tolist(),
        deficits=deficits.tolist(),
        observed_limit=float(tail[-1]),
        target=target,
        lim_tol=lim_tol,
        limit_matches=matches,
    )


# --------------------------------------------------------------------------------------------
# Four-point chain
# --------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainResult:
    verdict: LemmaVerdict
    failed_premises: list[str]
    links: dict[str, float] = field(default_factory=dict)
    """Margins of φ(z) − φ(u), φ(v) − φ(z), φ(w) − φ(v); filled in when the premises hold."""

    def export(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "failed_premises": list(self.failed_premises),
            "links": {k: json_float(v) for k, v in self.links.items()},
        }


def bode2_chain_check(
    f: FunctionHandle,
    v_star: npt.ArrayLike,
    u: npt.ArrayLike,
    v: npt.ArrayLike,
    w: npt.ArrayLike,
    z: npt.ArrayLike,
) -> ChainResult:
    """φ(u) < φ(z) ≤ φ(v) ≤ φ(w) for collinear u, z, v, w under the premises v ∈ ]u, w[,
    z ∈ ]u, v[, φ(u) ≤ φ(w) and φ_{v*}(z) > max{φ_{v*}(u), φ_{v*}(w)}.

    Unmet premises are a verdict, not an error.
    """
    pu, pv, pw, pz = (as_point(p, f.dim) for p in (u, v, w, z))
    perturbed = perturb(f, v_star)
    failed: list[str] = []
    if not _on_segment(pu, pw, pv, strict=True)[0]:
        failed.append("v in ]u, w[")
    if not _on_segment(pu, pv, pz, strict=True)[0]:
        failed.append("z in ]u, v[")
    fu, fv, fw, fz = (f(p) for p in (pu, pv, pw, pz))
    if not all(math.isfinite(x) for x in (fu, fv, fw, fz)):
        failed.append("phi finite at u, v, w, z")
    else:
        if fu > fw:
            failed.append("phi(u) <= phi(w)")
        gu, gw, gz = perturbed(pu), perturbed(pw), perturbed(pz)
        if not exceeds(gz, max(gu, gw)):
            failed.append("phi_v*(z) > max(phi_v*(u), phi_v*(w))")
    if failed:
        return ChainResult(LemmaVerdict.PREMISE_UNMET, failed)
    links = {"z_over_u": fz - fu, "v_over_z": fv - fz, "w_over_v": fw - fv}
    ok = (
        exceeds(fz, fu)
        and links["v_over_z"] >= -strict_tol(fv, fz)
        and links["w_over_v"] >= -strict_tol(fw, fv)
    )
    return ChainResult(_holds(ok), [], links)


# --------------------------------------------------------------------------------------------
# Construction of the triple (u, v, w) for a non-quasiconvex perturbation
# --------------------------------------------------------------------------------------------

LEVEL_GRID = 4097
LEVEL_REFINE_POINTS = 33
LEVEL_REFINE_ROUNDS = 3
GAMMAS = (0.1, 0.01, 0.001)


@dataclass(frozen=True)
class GammaProbe:
    gamma: float
    v_gamma: Point
    value: float
    """φ_{v*}(v_γ)."""

    passed: bool

    def export(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "v_gamma": json_vector(self.v_gamma),
            "value": json_float(self.value),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class TuacuctriTrace:
    v_star: Point
    u: Point
    w: Point
    v0: Point
    v: Point
    r: float
    level_points: Point
    """Grid approximation of {z ∈ ]u, w[ : φ_{v*}(z) ≥ φ_{v*}(v0)}, one point per row."""

    grid_tol: float
    gamma_probes: list[GammaProbe]
    dk3_margins: tuple[float, float]
    """(φ(w) − φ(v), φ(v) − φ(u))."""

    dk1_margin: float
    """φ_{v*}(v) − max{φ_{v*}(u), φ_{v*}(w)}."""

    @property
    def dk3(self) -> bool:
        return self.dk3_margins[0] >= 0.0 and self.dk3_margins[1] > 0.0

    @property
    def dk1(self) -> bool:
        return self.dk1_margin > 0.0

    @property
    def dk2(self) -> bool:
        return all(p.passed for p in self.gamma_probes)

    @property
    def verdict(self) -> LemmaVerdict:
        return _holds(self.dk1 and self.dk2 and self.dk3)

    def export(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "v_star": json_vector(self.v_star),
            "u": json_vector(self.u),
            "w": json_vector(self.w),
            "v0": json_vector(self.v0),
            "v": json_vector(self.v),
            "r": json_float(self.r),
            "level_set_points": int(self.level_points.shape[0]),
            "level_set_extent": [
                json_vector(self.level_points[0]),
                json_vector(self.level_points[-1]),
            ],
            "grid_tol": json_float(self.grid_tol),
            "dk1": self.dk1,
            "dk1_margin": json_float(self.dk1_margin),
            "dk2": self.dk2,
            "dk3": self.dk3,
            "dk3_margins": [json_float(m) for m in self.dk3_margins],
            "gamma_probes": [p.export() for p in self.gamma_probes],
        }


def _nonquasiconvex_triple(
    f: FunctionHandle, v_star: Point, box: Box, plan: SamplePlan
) -> tuple[Point, Point, Point]:
    verdict = check_quasiconvex_primal(perturb(f, v_star), box, plan)
    if verdict.status != CheckStatus.VIOLATED:
        raise PerturbationStillQuasiconvexAtScale(
            f"{f.name} + <v*, x> with v* = {v_star.tolist()} shows no violation on {box}"
        )
    witness = verdict.witness
    assert isinstance(witness, SegmentViolation)
    return witness.x, witness.y, witness.point


def tuacuctri_construct(
    f: FunctionHandle,
    v_star: npt.ArrayLike,
    box: Box | None = None,
    plan: SamplePlan | None = None,
    triple: tuple[npt.ArrayLike, npt.ArrayLike, npt.ArrayLike] | None = None,
) -> TuacuctriTrace:
    """Build v on ]u, w[ with φ(w) ≥ φ(v) > φ(u), φ_{v*}(v) > max{φ_{v*}(u), φ_{v*}(w)} and,
    for each probed γ, a point v_γ ∈ B_γ(v) ∩ ]v, w[ with φ_{v*}(v) > φ_{v*}(v_γ).

    (u, w, v0) comes from the primal checker's witness on φ_{v*}, or from `triple`, and is
    relabelled so φ(u) ≤ φ(w). v sits at distance r from w, where r is the distance from w to the
    closest grid point of the level set through v0 on ]u, w[.

    Raises:
        PreconditionViolated: f itself shows a quasiconvexity violation, or `triple` is not a
            violation of φ_{v*}.
        PerturbationStillQuasiconvexAtScale: no violation of φ_{v*} was found.
    """
    plan = plan or SamplePlan()
    box = box or f.default_box
    star = as_point(v_star, f.dim)
    perturbed = perturb(f, star)
    if check_quasiconvex_primal(f, box, plan).status == CheckStatus.VIOLATED:
        raise PreconditionViolated([f"{f.name} quasiconvex"])
    if triple is None:
        p, q, v0 = _nonquasiconvex_triple(f, star, box, plan)
    else:
        p, q, v0 = (as_point(t, f.dim) for t in triple)
        failed: list[str] = []
        if not _on_segment(p, q, v0, strict=True)[0]:
            failed.append("v0 in ]u, w[")
        if not exceeds(perturbed(v0), max(perturbed(p), perturbed(q))):
            failed.append("phi_v*(v0) > max(phi_v*(u), phi_v*(w))")
        if failed:
            raise PreconditionViolated(failed)
    u, w = (p, q) if f(p) <= f(q) else (q, p)

    gv0 = perturbed(v0)
    grid_tol = 1e-6 * (1.0 + abs(gv0))
    span = u - w
    length = float(np.linalg.norm(span))
    if length == 0.0:
        raise UserError("u and w coincide")

    def along(s: npt.NDArray[np.float64]) -> Point:
        return w[None, :] + s[:, None] * span[None, :]

    s_v0 = float(np.linalg.norm(v0 - w)) / length
    grid = np.append(np.arange(1, LEVEL_GRID + 1, dtype=float) / (LEVEL_GRID + 1), s_v0)
    grid.sort()
    inside = perturbed.evaluate_many(along(grid)) >= gv0 - grid_tol
    members = grid[inside]
    s_min = float(members[0])
    below = grid[grid < s_min]
    lo = float(below[-1]) if below.size else 0.0
    for _ in range(LEVEL_REFINE_ROUNDS):
        probes = np.linspace(lo, s_min, LEVEL_REFINE_POINTS)[1:]
        hit = perturbed.evaluate_many(along(probes)) >= gv0 - grid_tol
        first = int(np.argmax(hit))
        s_min = float(probes[first])
        lo = float(probes[first - 1]) if first > 0 else lo
    r = s_min * length
    v = w + (r / length) * span

    fu, fv, fw = f(u), f(v), f(w)
    gu, gv, gw = perturbed(u), perturbed(v), perturbed(w)
    probes_out: list[GammaProbe] = []
    for gamma in GAMMAS:
        r_gamma = min(r / 2, gamma / 2)
        v_gamma = w + ((r - r_gamma) / length) * span
        value = perturbed(v_gamma)
        passed = (
            exceeds(gv, value)
            and float(np.linalg.norm(v_gamma - v)) < gamma
            and _on_segment(v, w, v_gamma, strict=True)[0]
        )
        probes_out.append(GammaProbe(gamma, v_gamma, value, passed))
    trace = TuacuctriTrace(
        v_star=star,
        u=u,
        w=w,
        v0=v0,
        v=v,
        r=r,
        level_points=along(members),
        grid_tol=grid_tol,
        gamma_probes=probes_out,
        dk3_margins=(fw - fv, fv - fu),
        dk1_margin=gv - max(gu, gw),
    )
    logger.debug(f"tuacuctri on {f.name}: v={v.tolist()}, r={r}, verdict {trace.verdict.value}")
    return trace
