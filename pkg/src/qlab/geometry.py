"""Points, segments, boxes and seeded sampling.

Everything here is deterministic given a seed. Random draws come from numpy's PCG64 generator,
seeded through `SeedSequence([seed, stream])` so that each consumer (box sampling, sphere
directions, membership probes, ...) reads an independent, reproducible stream.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .exceptions import DegenerateSegment, DimensionError, UserError

Point = npt.NDArray[np.float64]
"""A finite vector in R^n. Batches of points are 2D arrays with one point per row."""

STREAM_BOX = 1
STREAM_DIRECTIONS = 2
STREAM_MEMBERSHIP = 3
STREAM_LEMMAS = 4

_UINT64 = 2**64


def rng(seed: int, stream: int) -> np.random.Generator:
    """The generator for one (seed, stream) pair. Seeds are taken modulo 2^64."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed % _UINT64, stream])))


def as_point(x: npt.ArrayLike, dim: int | None = None) -> Point:
    """Coerce to a 1D float64 vector, checking finiteness and (optionally) dimension."""
    point = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if dim is not None and point.shape[0] != dim:
        raise DimensionError(f"expected a point of dimension {dim}, got {point.shape[0]}")
    if not np.all(np.isfinite(point)):
        raise UserError(f"point coordinates must be finite, got {point.tolist()}")
    return point


def convex_combination(x: npt.ArrayLike, y: npt.ArrayLike, lam: npt.ArrayLike) -> Point:
    """λx + (1−λ)y, computed as y + λ(x − y).

    `lam` may be a scalar (returns one point) or a 1D array (returns one row per λ). Scans and
    witness re-verification both go through here, so a stored (x, y, λ) reproduces the scanned
    point exactly.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    lam_a = np.asarray(lam, dtype=float)
    if lam_a.ndim == 0:
        return ya + lam_a * (xa - ya)
    return ya[None, :] + lam_a[:, None] * (xa - ya)[None, :]


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n]."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or not self.lo:
            raise DimensionError("box bounds must be non-empty and of equal length")
        for i, (lo, hi) in enumerate(zip(self.lo, self.hi)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise UserError(f"box side {i + 1} must be finite, got [{lo}, {hi}]")
            if not lo < hi:
                raise UserError(f"box side {i + 1} needs lo < hi, got [{lo}, {hi}]")

    @classmethod
    def interval(cls, lo: float, hi: float) -> Box:
        return cls((float(lo),), (float(hi),))

    @classmethod
    def cube(cls, dim: int, lo: float, hi: float) -> Box:
        return cls((float(lo),) * dim, (float(hi),) * dim)

    @classmethod
    def parse(cls, text: str) -> Box:
        """Parse `"lo..hi[,lo..hi...]"`, one range per coordinate."""
        los: list[float] = []
        his: list[float] = []
        for part in text.split(","):
            bounds = part.strip().split("..")
            if len(bounds) != 2:
                raise UserError(f"cannot parse box side {part.strip()!r}, expected lo..hi")
            try:
                los.append(float(bounds[0]))
                his.append(float(bounds[1]))
            except ValueError as e:
                raise UserError(f"cannot parse box side {part.strip()!r}: {e}") from e
        return cls(tuple(los), tuple(his))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lower(self) -> Point:
        return np.asarray(self.lo, dtype=float)

    @property
    def upper(self) -> Point:
        return np.asarray(self.hi, dtype=float)

    @property
    def center(self) -> Point:
        return (self.lower + self.upper) / 2

    def contains(self, x: npt.ArrayLike) -> bool:
        point = np.asarray(x, dtype=float).ravel()
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))

    def __str__(self) -> str:
        return ",".join(f"{lo!r}..{hi!r}" for lo, hi in zip(self.lo, self.hi))


@dataclass(frozen=True, eq=False)
class SegmentNeighborhood:
    """B_λ([u, v]): the points within distance `radius` of the closed segment [u, v]."""

    u: Point
    v: Point
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise UserError(f"neighbourhood radius must be positive, got {self.radius}")

    def distance(self, x: npt.ArrayLike) -> float:
        """Euclidean distance from x to the segment (projection, clamped to [0, 1])."""
        point = np.asarray(x, dtype=float)
        direction = self.v - self.u
        length_sq = float(direction @ direction)
        if length_sq == 0.0:
            return float(np.linalg.norm(point - self.u))
        t = min(1.0, max(0.0, float((point - self.u) @ direction) / length_sq))
        return float(np.linalg.norm(point - (self.u + t * direction)))

    def contains(self, x: npt.ArrayLike) -> bool:
        return self.distance(x) < self.radius


def _positive(name: str, value: int) -> None:
    if value < 1:
        raise UserError(f"{name} must be at least 1, got {value}")


@dataclass(frozen=True)
class SamplePlan:
    """How densely the checkers sample. Verdicts are statements about this plan, so it is echoed
    into every report."""

    seed: int = 42
    """Seed for every random stream. Stored verbatim."""

    points_per_box: int = 256
    """Sample points drawn from the box; the checkers scan all pairs of them."""

    lambdas_per_segment: int = 33
    """Interior λ values on each sampled segment."""

    directions_per_sphere: int = 8
    """Seeded random directions added to the ± coordinate axes (n ≥ 2)."""

    refinement_rounds: int = 3
    """Rounds of λ refinement around the best violation candidate."""

    line_points: int = 4097
    """Grid size of the dense line scans of the primal checker."""

    def __post_init__(self) -> None:
        _positive("points_per_box", self.points_per_box)
        _positive("lambdas_per_segment", self.lambdas_per_segment)
        _positive("directions_per_sphere", self.directions_per_sphere)
        _positive("refinement_rounds", self.refinement_rounds)
        _positive("line_points", self.line_points)

    def export(self) -> dict[str, int]:
        return {
            "seed": self.seed,
            "points_per_box": self.points_per_box,
            "lambdas_per_segment": self.lambdas_per_segment,
            "directions_per_sphere": self.directions_per_sphere,
            "refinement_rounds": self.refinement_rounds,
            "line_points": self.line_points,
        }


def segment_lambdas(k: int, open: bool = True) -> npt.NDArray[np.float64]:
    """Equispaced grid of ]0, 1[ (k interior points) or of [0, 1] (k points including both
    ends)."""
    _positive("k", k)
    if open:
        return np.arange(1, k + 1, dtype=float) / (k + 1)
    if k == 1:
        return np.zeros(1)
    return np.linspace(0.0, 1.0, k)


def segment_points(u: npt.ArrayLike, v: npt.ArrayLike, k: int, open: bool = True) -> Point:
    """Points u + λ_j(v − u) ordered by λ, one per row.

    Raises:
        DegenerateSegment: when u == v.
    """
    ua = as_point(u)
    va = as_point(v, ua.shape[0])
    if np.array_equal(ua, va):
        raise DegenerateSegment(f"segment endpoints coincide at {ua.tolist()}")
    return convex_combination(va, ua, segment_lambdas(k, open))


def dyadic_lambdas(depth: int) -> npt.NDArray[np.float64]:
    """Interior points of [0, 1] in coarse-to-fine order: 1/2, 1/4, 3/4, 1/8, 3/8, ..."""
    values: list[float] = []
    for level in range(1, depth + 1):
        denominator = 2**level
        values.extend(j / denominator for j in range(1, denominator, 2))
    return np.asarray(values)


def unit_directions(n: int, k: int, seed: int) -> Point:
    """Unit vectors in R^n, one per row.

    For n = 1 this is exactly [+1, −1]. For n ≥ 2 it is the 2n signed coordinate axes followed
    by k seeded normalized Gaussian draws. The random part depends only on (n, seed) and the
    draw order, so asking for more directions extends the list without changing its prefix.
    """
    if n < 1:
        raise DimensionError(f"dimension must be positive, got {n}")
    _positive("k", k)
    if n == 1:
        return np.array([[1.0], [-1.0]])
    eye = np.eye(n)
    axes = np.empty((2 * n, n))
    axes[0::2] = eye
    axes[1::2] = -eye
    generator = rng(seed, STREAM_DIRECTIONS * 1_000 + n)
    drawn: list[Point] = []
    while len(drawn) < k:
        candidate = generator.standard_normal(n)
        norm = float(np.linalg.norm(candidate))
        if norm < 1e-12:
            continue
        drawn.append(candidate / norm)
    return np.vstack([axes, np.asarray(drawn)])


def _lattice_side(count: int, dim: int) -> int:
    side = int(math.floor(count ** (1.0 / dim) + 1e-9))
    if side > 1 and side % 2 == 0:
        side -= 1
    return max(side, 1)


def sample_box(box: Box, count: int, seed: int, stream: int = STREAM_BOX) -> Point:
    """`count` points in the box: a regular lattice for half of the budget, seeded uniform draws
    for the rest. The lattice has an odd number of points per side, so it contains the corners and
    the centre of the box."""
    _positive("count", count)
    lattice_budget = count // 2
    rows: list[Point] = []
    if lattice_budget >= 1:
        side = _lattice_side(lattice_budget, box.dim)
        if side == 1:
            axes = [np.array([c]) for c in box.center]
        else:
            axes = [np.linspace(lo, hi, side) for lo, hi in zip(box.lo, box.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        rows.append(np.stack([m.ravel() for m in mesh], axis=1))
    taken = sum(r.shape[0] for r in rows)
    remaining = count - taken
    if remaining > 0:
        generator = rng(seed, stream)
        rows.append(generator.uniform(box.lower, box.upper, size=(remaining, box.dim)))
    return np.vstack(rows)


def sample_in_box(box: Box, count: int, seed: int, stream: int) -> Point:
    """Plain seeded uniform draws, for callers that need no lattice (tests, lemma inputs)."""
    return rng(seed, stream).uniform(box.lower, box.upper, size=(count, box.dim))


def dedupe_rows(points: Point, extra: Iterable[Sequence[float]]) -> Point:
    """Append the `extra` points that are not already rows of `points` (exact comparison)."""
    rows = [points]
    seen = {tuple(p) for p in points.tolist()}
    for candidate in extra:
        key = tuple(float(c) for c in candidate)
        if key not in seen:
            seen.add(key)
            rows.append(np.asarray([key], dtype=float))
    return np.vstack(rows)
