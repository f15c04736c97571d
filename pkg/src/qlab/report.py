"""The serializable result of a suite run, and the plot traces written next to it."""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from .catalog import FunctionHandle
from .exceptions import DimensionError
from .geometry import Box, as_point
from .logger import logger
from .subdiff import perturb

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_VIOLATED = 2
EXIT_UNDECIDED = 3

FAILING_STATUSES = frozenset({"violated", "fails_at_scale"})
"""Statuses that refute the property under test."""

UNDECIDED_STATUSES = frozenset(
    {"inconclusive", "not_found_at_scale", "premise_unmet", "precondition_violated"}
)
"""Statuses that neither refute nor support it at this plan."""

PLOT_POINTS = 1001

# Fields that differ between two runs of the same config.
TIMING_FIELDS: dict[str, Any] = {
    "started_at": True,
    "duration_seconds": True,
    "entries": {"__all__": {"duration_seconds"}},
}


class EntryKind(str, enum.Enum):
    CHECK = "check"
    ALPHA_STAR = "alpha_star"
    LEMMA = "lemma"


class ReportEntry(BaseModel):
    """One step of the suite, in the order it ran."""

    model_config = ConfigDict(frozen=True)

    kind: EntryKind
    name: str
    """Checker name, α* method or lemma name."""

    status: str
    """Satisfied/violated/inconclusive for checks, a lemma verdict for lemmas, "bracketed" for
    α* estimates."""

    result: dict[str, Any]
    """The exported verdict, estimate or trace."""

    duration_seconds: float = 0.0


class SkipStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    points_skipped: int = 0
    """Sample points dropped because φ was +∞ there or no subgradient could be sampled."""

    nan_converted: int = 0
    """NaN values turned into +∞ during checker scans."""


class Report(BaseModel):
    """Everything a run produced. Re-running `config` reproduces every field except the
    timings."""

    model_config = ConfigDict(frozen=True)

    tool: Literal["qlab"] = "qlab"
    version: str
    config: dict[str, Any]
    """The run configuration, seed resolved."""

    function: dict[str, Any]
    plan: dict[str, int]
    entries: list[ReportEntry] = Field(default_factory=list)
    skipped: SkipStats = Field(default_factory=SkipStats)
    exit_code: int = EXIT_OK
    started_at: str = ""
    duration_seconds: float = 0.0

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def reproducible_dump(self) -> dict[str, Any]:
        """The report without its timing fields; equal across runs of the same config."""
        return self.model_dump(mode="json", exclude=TIMING_FIELDS)

    def write(self, path: str | Path) -> None:
        target = Path(path)
        target.write_text(self.to_json() + "\n", encoding="utf-8")
        logger.debug(f"Wrote report with {len(self.entries)} entries to {target}")


def exit_code_for(statuses: Iterable[str]) -> int:
    """2 if anything failed, else 3 if anything is undecided, else 0."""
    seen = set(statuses)
    if seen & FAILING_STATUSES:
        return EXIT_VIOLATED
    if seen & UNDECIDED_STATUSES:
        return EXIT_UNDECIDED
    return EXIT_OK


def _tsv_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def write_plot_trace(
    path: str | Path,
    f: FunctionHandle,
    v_star: npt.ArrayLike,
    box: Box | None = None,
    points: int = PLOT_POINTS,
) -> int:
    """Write `x  phi  phi_vstar` columns for a 1D function over `box`. Returns the row count.

    Raises:
        DimensionError: f is not one-dimensional.
    """
    if f.dim != 1:
        raise DimensionError(f"plot traces need a 1D function, {f.name} has dimension {f.dim}")
    box = box or f.default_box
    star = as_point(v_star, 1)
    xs = np.linspace(box.lo[0], box.hi[0], points)
    phi = f.evaluate_many(xs.reshape(-1, 1))
    phi_star = perturb(f, star).evaluate_many(xs.reshape(-1, 1))
    lines = ["x\tphi\tphi_vstar"]
    lines.extend(
        f"{_tsv_float(x)}\t{_tsv_float(a)}\t{_tsv_float(b)}" for x, a, b in zip(xs, phi, phi_star)
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {points} plot rows for {f.name} with v* = {star.tolist()} to {path}")
    return points
