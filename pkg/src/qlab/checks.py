"""Sampled property checkers.

Primal checkers scan segments between sample points of a box; dual checkers scan pairs of sample
points together with finite samples of the Fréchet subdifferential at each of them. A checker
never certifies a property: `Satisfied` means no violation was found at the given `SamplePlan`,
`Violated` carries a witness that re-verifies by direct evaluation.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from . import _debug
from .catalog import FunctionHandle, kinks_in_box
from .exceptions import DimensionError, UserError
from .exprlang import EvalStats
from .geometry import (
    Box,
    Point,
    SamplePlan,
    convex_combination,
    dedupe_rows,
    sample_box,
    segment_lambdas,
    unit_directions,
)
from .logger import logger
from .subdiff import MembershipConfig, perturb, subgradients_at
from .verdict import (
    AnyWitness,
    CheckStatus,
    CheckVerdict,
    ConditionBViolation,
    LscViolation,
    MonotoneViolation,
    PairsViolation,
    QuasimonotoneViolation,
    RobustPrimalViolation,
    SegmentViolation,
    strict_tol,
)

CANDIDATES_TRIED = 8
"""How many violation candidates are materialized before a scan gives up as inconclusive."""

REFINE_POINTS = 9

MAGNITUDE_SHRINK = 1.0 - 1e-6
"""Perturbation magnitudes stay strictly below α: m_j = α·MAGNITUDE_SHRINK·j/K."""

LSC_R0 = 1e-2
LSC_LEVELS = 12

Values = npt.NDArray[np.float64]


@dataclass(frozen=True)
class RobustParams:
    """How the ball of perturbations ‖v*‖ < α is sampled."""

    alpha: float

    direction_count: int = 8
    """Seeded random directions added to the ± coordinate axes (n ≥ 2; 1D uses ±1)."""

    magnitude_count: int = 8
    """Equispaced magnitudes in ]0, α[, never equal to α."""

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if self.direction_count < 1 or self.magnitude_count < 1:
            raise UserError("direction_count and magnitude_count must be at least 1")

    def magnitudes(self) -> Values:
        """Descending, so the strongest perturbations are tried first."""
        k = self.magnitude_count
        return self.alpha * MAGNITUDE_SHRINK * np.arange(k, 0, -1, dtype=float) / k


def robust_perturbations(dim: int, rp: RobustParams, seed: int) -> Iterator[Point]:
    """The sampled v*, magnitudes descending and then in direction order."""
    directions = unit_directions(dim, rp.direction_count, seed)
    for magnitude in rp.magnitudes():
        for direction in directions:
            yield magnitude * direction


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and alpha > 0):
        raise UserError(f"alpha must be a positive finite number, got {alpha}")


def _check_dim(f: FunctionHandle, box: Box) -> None:
    if box.dim != f.dim:
        raise DimensionError(f"box has dimension {box.dim}, {f.name} has {f.dim}")


def box_samples(f: FunctionHandle, box: Box, plan: SamplePlan) -> Point:
    """The seeded sample points of `box`, with f's known kinks in the box appended."""
    _check_dim(f, box)
    points = sample_box(box, plan.points_per_box, plan.seed)
    return dedupe_rows(points, kinks_in_box(f, box))


def _log_verdict(name: str, f: FunctionHandle, verdict: CheckVerdict) -> None:
    logger.debug(
        f"{name} on {f.name}: {verdict.status.value}, {verdict.pairs_scanned} pairs,"
        f" {verdict.points_skipped} skipped"
    )
    if verdict.witness is not None and _debug.LOG_WITNESS_DATA:
        logger.debug(f"{name} witness: {verdict.witness.export()}")
    if verdict.nan_converted:
        logger.warning(
            f"{name} on {f.name}: {verdict.nan_converted} NaN or -inf values treated as +inf"
        )


# --------------------------------------------------------------------------------------------
# Primal scans
# --------------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _SegmentGroup:
    """Segments sharing one parameter grid. Segment s runs from starts[s] (t = 0) to ends[s]."""

    starts: Point
    ends: Point
    ts: Values
    values: Values
    """Base function values, shape (segments, len(ts))."""

    def points(self, segment: int, ts: Values) -> Point:
        start = self.starts[segment]
        return start[None, :] + ts[:, None] * (self.ends[segment] - start)[None, :]

    def perturbed_values(self, v_star: Point) -> Values:
        offset = self.starts @ v_star
        slope = (self.ends - self.starts) @ v_star
        return self.values + offset[:, None] + self.ts[None, :] * slope[:, None]


def _grid_values(
    f: FunctionHandle, starts: Point, ends: Point, ts: Values, stats: EvalStats
) -> Values:
    grid = starts[:, None, :] + ts[None, :, None] * (ends - starts)[:, None, :]
    values = f.evaluate_many(grid.reshape(-1, f.dim), stats)
    return values.reshape(starts.shape[0], ts.shape[0])


def _dense_lines(box: Box) -> tuple[Point, Point]:
    """1D: the box itself. nD: each coordinate axis through the centre, then the main diagonal."""
    if box.dim == 1:
        return box.lower.reshape(1, 1), box.upper.reshape(1, 1)
    starts = np.tile(box.center, (box.dim + 1, 1))
    ends = starts.copy()
    for i in range(box.dim):
        starts[i, i] = box.lo[i]
        ends[i, i] = box.hi[i]
    starts[-1] = box.lower
    ends[-1] = box.upper
    return starts, ends


def _excess(values: Values) -> tuple[Values, Values]:
    """Sub-segment form of the definition on each row: how far each interior grid value rises above
    the larger of the smallest values on either side of it. Returns (excess, excess − tol)."""
    left = np.minimum.accumulate(values, axis=1)[:, :-2]
    right = np.minimum.accumulate(values[:, ::-1], axis=1)[:, ::-1][:, 2:]
    middle = values[:, 1:-1]
    bound = np.maximum(left, right)
    with np.errstate(invalid="ignore"):
        excess = middle - bound
    excess = np.where(np.isnan(excess), -np.inf, excess)
    return excess, excess - strict_tol(middle, bound)


@dataclass(eq=False)
class _PrimalScan:
    groups: list[_SegmentGroup]
    points_skipped: int
    stats: EvalStats
    plan: SamplePlan
    segments: int = field(init=False)

    def __post_init__(self) -> None:
        self.segments = sum(g.starts.shape[0] for g in self.groups)

    @classmethod
    def build(cls, f: FunctionHandle, box: Box, plan: SamplePlan) -> _PrimalScan:
        stats = EvalStats()
        points = box_samples(f, box, plan)
        values = f.evaluate_many(points, stats)
        finite = np.flatnonzero(np.isfinite(values))
        groups: list[_SegmentGroup] = []
        if plan.line_points >= 3:
            starts, ends = _dense_lines(box)
            ts = segment_lambdas(plan.line_points, open=False)
            groups.append(
                _SegmentGroup(starts, ends, ts, _grid_values(f, starts, ends, ts, stats))
            )
        if finite.shape[0] >= 2:
            i, j = np.triu_indices(finite.shape[0], k=1)
            starts, ends = points[finite[i]], points[finite[j]]
            ts = segment_lambdas(plan.lambdas_per_segment + 2, open=False)
            groups.append(
                _SegmentGroup(starts, ends, ts, _grid_values(f, starts, ends, ts, stats))
            )
        skipped = int(points.shape[0] - finite.shape[0])
        return cls(groups=groups, points_skipped=skipped, stats=stats, plan=plan)

    def values_under(self, v_star: Point | None) -> list[Values]:
        if v_star is None:
            return [g.values for g in self.groups]
        return [g.perturbed_values(v_star) for g in self.groups]

    def run(self, f: FunctionHandle, all_values: Sequence[Values]) -> CheckVerdict:
        """Scan every group; `f` is the function the values belong to (used for refinement and
        witness materialization)."""
        candidates: list[tuple[float, int, int]] = []
        best = -math.inf
        for g, values in enumerate(all_values):
            if values.shape[1] < 3:
                continue
            excess, margin = _excess(values)
            if excess.size:
                best = max(best, float(excess.max()))
            flat = np.where(margin > 0, excess, -np.inf).ravel()
            hits = int(np.count_nonzero(flat > -np.inf))
            if not hits:
                continue
            order = np.argsort(-flat, kind="stable")[: min(hits, CANDIDATES_TRIED)]
            candidates.extend((float(flat[k]), g, int(k)) for k in order)
        worst_margin = -best if best > -math.inf else math.inf
        common = dict(
            pairs_scanned=self.segments,
            points_skipped=self.points_skipped,
            nan_converted=self.stats.total,
        )
        if not candidates:
            return CheckVerdict(CheckStatus.SATISFIED, worst_margin=worst_margin, **common)
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        for _, g, k in candidates[:CANDIDATES_TRIED]:
            values = all_values[g]
            width = values.shape[1] - 2
            witness = self._materialize(f, g, values[k // width], k // width, k % width + 1)
            if witness is not None:
                return CheckVerdict(
                    CheckStatus.VIOLATED,
                    witness=witness,
                    worst_margin=min(worst_margin, witness.rhs - witness.lhs),
                    **common,
                )
        return CheckVerdict(
            CheckStatus.INCONCLUSIVE,
            worst_margin=worst_margin,
            note="violation candidates did not survive re-evaluation",
            **common,
        )

    def _materialize(
        self, f: FunctionHandle, g: int, row: Values, segment: int, mid: int
    ) -> SegmentViolation | None:
        group = self.groups[g]
        ts = group.ts
        a = int(np.argmin(row[:mid]))
        b = mid + 1 + int(np.argmin(row[mid + 1 :]))
        t_mid = float(ts[mid])
        lo, hi = float(ts[mid - 1]), float(ts[mid + 1])
        best_value = float(row[mid])
        for _ in range(self.plan.refinement_rounds):
            probes = np.linspace(lo, hi, REFINE_POINTS)
            inner = probes[1:-1]
            values = f.evaluate_many(group.points(segment, inner))
            k = int(np.argmax(values))
            if values[k] > best_value:
                best_value = float(values[k])
                t_mid = float(inner[k])
            lo, hi = float(probes[k]), float(probes[k + 2])
        t_a, t_b = float(ts[a]), float(ts[b])
        x, y = group.points(segment, np.array([t_a, t_b]))
        lam = (t_mid - t_b) / (t_a - t_b)
        ends = f.evaluate_many(np.vstack([convex_combination(x, y, lam), x, y]))
        witness = SegmentViolation(
            x=x, y=y, lam=lam, lhs=float(ends[0]), rhs=float(max(ends[1], ends[2]))
        )
        return witness if witness.reverify(f) else None


def check_quasiconvex_primal(f: FunctionHandle, box: Box, plan: SamplePlan) -> CheckVerdict:
    """The definition φ(λx + (1−λ)y) ≤ max{φ(x), φ(y)} on sampled segments.

    Segments are the dense lines of the box and all pairs of sample points with finite values;
    pairs with an infinite endpoint are skipped. On each segment every interior grid point is
    compared against the smallest values on both sides of it, and the largest excess is refined
    and reported.
    """
    scan = _PrimalScan.build(f, box, plan)
    verdict = scan.run(f, scan.values_under(None))
    _log_verdict("quasiconvex", f, verdict)
    return verdict


def check_robust_primal(
    f: FunctionHandle, box: Box, rp: RobustParams, plan: SamplePlan
) -> CheckVerdict:
    """Run the primal scan on φ + ⟨v*, ·⟩ for every sampled v* with ‖v*‖ < α.

    Base values are computed once; each perturbation only adds its linear term. The first failing
    v* (magnitudes descending, then direction order) is reported.
    """
    scan = _PrimalScan.build(f, box, plan)
    scanned = 0
    worst = math.inf
    note: str | None = None
    for v_star in robust_perturbations(f.dim, rp, plan.seed):
        verdict = scan.run(perturb(f, v_star), scan.values_under(v_star))
        scanned += verdict.pairs_scanned
        worst = min(worst, verdict.worst_margin)
        if verdict.status == CheckStatus.VIOLATED:
            assert isinstance(verdict.witness, SegmentViolation)
            out = CheckVerdict(
                CheckStatus.VIOLATED,
                witness=RobustPrimalViolation(v_star=v_star, inner=verdict.witness),
                pairs_scanned=scanned,
                points_skipped=scan.points_skipped,
                worst_margin=verdict.worst_margin,
                nan_converted=scan.stats.total,
            )
            _log_verdict("robust-primal", f, out)
            return out
        if verdict.status == CheckStatus.INCONCLUSIVE and note is None:
            note = f"inconclusive at v* = {v_star.tolist()}"
    status = CheckStatus.INCONCLUSIVE if note else CheckStatus.SATISFIED
    out = CheckVerdict(
        status,
        pairs_scanned=scanned,
        points_skipped=scan.points_skipped,
        worst_margin=worst,
        nan_converted=scan.stats.total,
        note=note,
    )
    _log_verdict("robust-primal", f, out)
    return out


# --------------------------------------------------------------------------------------------
# Dual scans
# --------------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _SubgradientTable:
    """Sample points and one row per sampled subgradient, tagged with the index of its point."""

    points: Point
    values: Values
    owners: npt.NDArray[np.intp]
    rows: Point
    skipped: int
    stats: EvalStats

    @classmethod
    def build(cls, f: FunctionHandle, box: Box, plan: SamplePlan) -> _SubgradientTable:
        stats = EvalStats()
        points = box_samples(f, box, plan)
        values = f.evaluate_many(points, stats)
        membership = MembershipConfig(seed=plan.seed)
        owners: list[int] = []
        rows: list[Point] = []
        skipped = 0
        for i, point in enumerate(points):
            if not np.isfinite(values[i]):
                skipped += 1
                continue
            sample = subgradients_at(f, point, membership)
            if sample.skipped:
                skipped += 1
                continue
            owners.extend([i] * sample.subgradients.shape[0])
            rows.append(sample.subgradients)
        return cls(
            points=points,
            values=values,
            owners=np.asarray(owners, dtype=np.intp),
            rows=np.vstack(rows) if rows else np.empty((0, f.dim)),
            skipped=skipped,
            stats=stats,
        )

    @property
    def bases(self) -> Point:
        """The point each row belongs to."""
        return self.points[self.owners]

    def inner_to_points(self) -> Values:
        """⟨x*_r, y_j − x_r⟩ for every row r and sample point j."""
        diff = self.points[None, :, :] - self.bases[:, None, :]
        return np.einsum("rn,rmn->rm", self.rows, diff)

    def inner_to_rows(self) -> Values:
        """⟨x*_r, x_s − x_r⟩ for every pair of rows."""
        bases = self.bases
        diff = bases[None, :, :] - bases[:, None, :]
        return np.einsum("rn,rsn->rs", self.rows, diff)

    def distinct_row_pairs(self) -> npt.NDArray[np.bool_]:
        """Upper-triangular mask of row pairs whose points differ."""
        n = self.owners.shape[0]
        upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        return upper & (self.owners[:, None] != self.owners[None, :])


WitnessBuilder = Callable[[int, int], AnyWitness]
"""Builds the witness for entry (row, column) of a violation mask."""


def _first_witness(
    f: FunctionHandle, hits: npt.NDArray[np.bool_], build: WitnessBuilder
) -> AnyWitness | None:
    """Materialize violations in row-major order and return the first that re-verifies."""
    for flat in np.flatnonzero(hits)[:CANDIDATES_TRIED]:
        r, c = np.unravel_index(int(flat), hits.shape)
        witness = build(int(r), int(c))
        if witness.reverify(f):
            return witness
    return None


def _dual_verdict(
    name: str,
    f: FunctionHandle,
    table: _SubgradientTable,
    scanned: npt.NDArray[np.bool_],
    hits: npt.NDArray[np.bool_],
    slack: Values,
    build: WitnessBuilder,
) -> CheckVerdict:
    """`slack` is positive where the inequality holds; only entries under `scanned` count."""
    worst = float(slack[scanned].min()) if scanned.any() else math.inf
    pairs = int(scanned.sum())
    witness = _first_witness(f, hits, build) if hits.any() else None
    if witness is not None:
        status = CheckStatus.VIOLATED
        worst = min(worst, 0.0)
    elif hits.any():
        status = CheckStatus.INCONCLUSIVE
    else:
        status = CheckStatus.SATISFIED
    verdict = CheckVerdict(
        status,
        witness=witness,
        pairs_scanned=pairs,
        points_skipped=table.skipped,
        worst_margin=worst,
        nan_converted=table.stats.total,
        note=(
            "violation candidates did not survive re-evaluation"
            if status == CheckStatus.INCONCLUSIVE
            else None
        ),
    )
    _log_verdict(name, f, verdict)
    return verdict


def _condition_b(
    name: str, f: FunctionHandle, box: Box, alpha: float | None, plan: SamplePlan
) -> CheckVerdict:
    table = _SubgradientTable.build(f, box, plan)
    inner = table.inner_to_points()
    fx = table.values[table.owners][:, None]
    fy = table.values[None, :]
    columns = np.arange(table.points.shape[0])
    scanned = np.isfinite(fy) & (fy <= fx) & (columns[None, :] != table.owners[:, None])
    if alpha is None:
        bound = np.zeros_like(inner)
    else:
        distance = np.linalg.norm(table.points[None, :, :] - table.bases[:, None, :], axis=2)
        bound = -np.minimum(alpha * distance, fx - fy)
    hits = scanned & (inner - bound > strict_tol(inner, bound))

    def build(r: int, c: int) -> AnyWitness:
        return ConditionBViolation(
            x=table.points[table.owners[r]],
            y=table.points[c],
            x_star=table.rows[r],
            inner=float(inner[r, c]),
            bound=float(bound[r, c]),
            alpha=alpha,
        )

    return _dual_verdict(name, f, table, scanned, hits, bound - inner, build)


def check_condition_b(f: FunctionHandle, box: Box, plan: SamplePlan) -> CheckVerdict:
    """φ(y) ≤ φ(x) ⟹ ⟨x*, y − x⟩ ≤ 0 for every sampled x* ∈ ∂̂φ(x)."""
    return _condition_b("cond-b", f, box, None, plan)


def check_robust_condition_b(
    f: FunctionHandle, box: Box, alpha: float, plan: SamplePlan
) -> CheckVerdict:
    """φ(y) ≤ φ(x) ⟹ ⟨x*, y − x⟩ ≤ −min{α‖y − x‖, φ(x) − φ(y)}."""
    _check_alpha(alpha)
    return _condition_b("robust-b", f, box, alpha, plan)


def _row_pair(table: _SubgradientTable, r: int, c: int) -> tuple[Point, Point, Point, Point]:
    return (
        table.points[table.owners[r]],
        table.points[table.owners[c]],
        table.rows[r],
        table.rows[c],
    )


def check_quasimonotone(f: FunctionHandle, box: Box, plan: SamplePlan) -> CheckVerdict:
    """min{⟨x*, y − x⟩, ⟨y*, x − y⟩} ≤ 0 for every sampled pair and subgradient cross-product."""
    table = _SubgradientTable.build(f, box, plan)
    a = table.inner_to_rows()
    m = np.minimum(a, a.T)
    scanned = table.distinct_row_pairs()
    hits = scanned & (m > strict_tol(m, np.zeros_like(m)))

    def build(r: int, c: int) -> AnyWitness:
        x, y, x_star, y_star = _row_pair(table, r, c)
        return QuasimonotoneViolation(x=x, y=y, x_star=x_star, y_star=y_star, m=float(m[r, c]))

    return _dual_verdict("quasimonotone", f, table, scanned, hits, -m, build)


def check_monotone(f: FunctionHandle, box: Box, plan: SamplePlan) -> CheckVerdict:
    """⟨x* − y*, x − y⟩ ≥ 0 for every sampled pair: monotonicity of ∂̂φ, which holds exactly when
    φ is convex."""
    table = _SubgradientTable.build(f, box, plan)
    a = table.inner_to_rows()
    gap = -(a + a.T)
    scanned = table.distinct_row_pairs()
    hits = scanned & (-gap > strict_tol(gap, np.zeros_like(gap)))

    def build(r: int, c: int) -> AnyWitness:
        x, y, x_star, y_star = _row_pair(table, r, c)
        return MonotoneViolation(x=x, y=y, x_star=x_star, y_star=y_star, gap=float(gap[r, c]))

    return _dual_verdict("monotone", f, table, scanned, hits, gap, build)


def check_robust_pairs(
    f: FunctionHandle, box: Box, alpha: float, plan: SamplePlan
) -> CheckVerdict:
    """min{⟨x*, y − x⟩, ⟨y*, x − y⟩} > −α‖y − x‖ ⟹ ⟨x* − y*, x − y⟩ ≥ 0.

    A pair violates when the premise holds with margin above the strict tolerance and the
    conclusion fails by more than it.
    """
    _check_alpha(alpha)
    table = _SubgradientTable.build(f, box, plan)
    a = table.inner_to_rows()
    m = np.minimum(a, a.T)
    gap = -(a + a.T)
    bases = table.bases
    floor = -alpha * np.linalg.norm(bases[None, :, :] - bases[:, None, :], axis=2)
    premise = table.distinct_row_pairs() & (m - floor > strict_tol(m, floor))
    hits = premise & (-gap > strict_tol(gap, np.zeros_like(gap)))

    def build(r: int, c: int) -> AnyWitness:
        x, y, x_star, y_star = _row_pair(table, r, c)
        return PairsViolation(
            x=x,
            y=y,
            x_star=x_star,
            y_star=y_star,
            premise_margin=float(m[r, c] - floor[r, c]),
            monotone_gap=float(gap[r, c]),
            alpha=alpha,
        )

    scanned = table.distinct_row_pairs()
    slack = np.where(premise, gap, np.inf)
    return _dual_verdict("robust-pairs", f, table, scanned, hits, slack, build)


# --------------------------------------------------------------------------------------------
# Lower semicontinuity
# --------------------------------------------------------------------------------------------


def check_lsc_sampled(f: FunctionHandle, box: Box, plan: SamplePlan) -> CheckVerdict:
    """Spot check of lower semicontinuity at the sample points.

    Around each x the deficit δ_j = φ(x) − min φ over a sphere of radius r_j = 1e-2·2^-j is
    measured. x violates when δ stays above the strict tolerance over the last three radii and the
    extrapolation of δ to r → 0 does too; continuous functions have δ_j → 0 at least linearly, which
    the extrapolation cancels.
    """
    stats = EvalStats()
    points = box_samples(f, box, plan)
    values = f.evaluate_many(points, stats)
    directions = unit_directions(f.dim, plan.directions_per_sphere, plan.seed)
    radii = LSC_R0 * 0.5 ** np.arange(LSC_LEVELS + 1)
    finite = np.flatnonzero(np.isfinite(values))
    offsets = radii[:, None, None] * directions[None, :, :]
    best_score = -math.inf
    for i in finite:
        x = points[i]
        sphere = x[None, None, :] + offsets
        around = f.evaluate_many(sphere.reshape(-1, f.dim), stats).reshape(len(radii), -1)
        lowest = around.min(axis=1)
        deficits = values[i] - lowest
        tail = deficits[-3:]
        if not np.all(np.isfinite(tail)):
            continue
        extrapolated = (8 * tail[2] - 6 * tail[1] + tail[0]) / 3
        tol = strict_tol(values[i], lowest[-1])
        score = float(min(tail.min(), extrapolated)) - tol
        best_score = max(best_score, score)
        if score > 0:
            k = int(np.argmin(around[-1]))
            witness = LscViolation(
                x=x.copy(),
                y=sphere[-1, k].copy(),
                value_x=float(values[i]),
                value_y=float(around[-1, k]),
                radius=float(radii[-1]),
            )
            if witness.reverify(f):
                verdict = CheckVerdict(
                    CheckStatus.VIOLATED,
                    witness=witness,
                    pairs_scanned=int(finite.shape[0]),
                    points_skipped=int(points.shape[0] - finite.shape[0]),
                    worst_margin=-score,
                    nan_converted=stats.total,
                )
                _log_verdict("lsc", f, verdict)
                return verdict
    verdict = CheckVerdict(
        CheckStatus.SATISFIED,
        pairs_scanned=int(finite.shape[0]),
        points_skipped=int(points.shape[0] - finite.shape[0]),
        worst_margin=-best_score if best_score > -math.inf else math.inf,
        nan_converted=stats.total,
    )
    _log_verdict("lsc", f, verdict)
    return verdict
