"""Brute-force 1D oracles that the catalog labels are derived from.

These never sample: they walk a fixed grid of the default box at resolution 1e-4, so every label
can be recomputed from scratch by the test-suite.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
import numpy.typing as npt

from .exceptions import DimensionError, UserError
from .geometry import Box
from .verdict import strict_tol

ORACLE_RESOLUTION = 1e-4

Vectorized = Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]


def slope_sign_change_alpha(slopes: npt.ArrayLike) -> float:
    """The smallest |v| for which the slope sequence `slopes + v` turns from positive to negative
    somewhere, i.e. the perturbed function gains an interior local maximum.

    The bad values of t = −v form the union over j of the open intervals
    (s_j, max_{i<j} s_i); the answer is the distance from 0 to that union. Returns +inf when the
    union is empty (the sequence is nondecreasing).
    """
    s = np.asarray(slopes, dtype=float).ravel()
    if s.shape[0] < 2:
        return math.inf
    prefix_max = np.maximum.accumulate(s)[:-1]
    following = s[1:]
    bad = prefix_max > following
    if not bad.any():
        return math.inf
    lo = following[bad]
    hi = prefix_max[bad]
    distance = np.where(lo >= 0, lo, np.where(hi <= 0, -hi, 0.0))
    return float(distance.min())


def _grid(box: Box, resolution: float) -> npt.NDArray[np.float64]:
    if box.dim != 1:
        raise DimensionError("the label oracles are one-dimensional")
    if not resolution > 0:
        raise UserError("resolution must be positive")
    count = int(math.ceil((box.hi[0] - box.lo[0]) / resolution)) + 1
    return np.linspace(box.lo[0], box.hi[0], count)


def derivative_oracle(
    derivative: Vectorized, box: Box, resolution: float = ORACLE_RESOLUTION
) -> float:
    """α* of a smooth 1D function from its derivative sampled on the box grid."""
    grid = _grid(box, resolution)
    with np.errstate(all="ignore"):
        slopes = derivative(grid)
    return slope_sign_change_alpha(slopes[np.isfinite(slopes)])


def difference_oracle(f: Vectorized, box: Box, resolution: float = ORACLE_RESOLUTION) -> float:
    """α* of a 1D function from forward-difference slopes of its values on the box grid. Works for
    discontinuous functions, where jumps show up as slopes of size 1/resolution."""
    grid = _grid(box, resolution)
    with np.errstate(all="ignore"):
        values = f(grid)
    return slope_sign_change_alpha(np.diff(values) / np.diff(grid))


def unimodal_scan(values: npt.ArrayLike) -> bool:
    """The quasiconvexity definition on a dense 1D grid: True iff no grid point exceeds the larger
    of the smallest values on either side of it."""
    v = np.asarray(values, dtype=float).ravel()
    if v.shape[0] < 3:
        return True
    left = np.minimum.accumulate(v)[:-2]
    right = np.minimum.accumulate(v[::-1])[::-1][2:]
    middle = v[1:-1]
    bound = np.maximum(left, right)
    return not bool(np.any(middle - bound > strict_tol(middle, bound)))
