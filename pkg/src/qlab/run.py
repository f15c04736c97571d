from __future__ import annotations

import datetime
import enum
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)

from ._debug import env_seed
from ._utils import attach_error_to_span
from .alpha import DEFAULT_CAP, DEFAULT_MAGNITUDES, DEFAULT_TOL, AlphaMethod, estimate_alpha_star
from .catalog import FunctionHandle, catalog_lookup, from_expression
from .checks import (
    RobustParams,
    check_condition_b,
    check_lsc_sampled,
    check_monotone,
    check_quasiconvex_primal,
    check_quasimonotone,
    check_robust_condition_b,
    check_robust_pairs,
    check_robust_primal,
)
from .exceptions import (
    ConfigError,
    PerturbationStillQuasiconvexAtScale,
    PreconditionViolated,
    QlabException,
)
from .geometry import Box, Point, SamplePlan
from .lemmas import (
    LemmaVerdict,
    bode2_chain_check,
    mvt_verify,
    radial_limit_check,
    three_points_witness,
    tuacuctri_construct,
)
from .logger import logger
from .report import EntryKind, Report, ReportEntry, SkipStats, exit_code_for, write_plot_trace
from .tracing import (
    Span,
    SpanError,
    Trace,
    check_span,
    custom_span,
    estimator_span,
    get_current_trace,
    lemma_span,
    trace,
)
from .verdict import CheckVerdict, RobustPrimalViolation
from .version import __version__

DEFAULT_SEED = 42


class CheckName(str, enum.Enum):
    QUASICONVEX = "quasiconvex"
    CONDITION_B = "cond-b"
    QUASIMONOTONE = "quasimonotone"
    MONOTONE = "monotone"
    LSC = "lsc"
    ROBUST_PRIMAL = "robust-primal"
    ROBUST_B = "robust-b"
    ROBUST_PAIRS = "robust-pairs"

    @property
    def needs_alpha(self) -> bool:
        return self in (CheckName.ROBUST_PRIMAL, CheckName.ROBUST_B, CheckName.ROBUST_PAIRS)


LemmaName = Literal["mvt", "three-points", "tuacuctri", "bode2", "radial-limit"]

_LEMMA_POINTS: dict[str, tuple[str, ...]] = {
    "mvt": ("a", "b"),
    "three-points": ("u", "v", "w"),
    "tuacuctri": (),
    "bode2": ("u", "v", "w", "z"),
    "radial-limit": ("u", "v"),
}


class LemmaTask(BaseModel):
    """One lemma harness invocation. Which points are required depends on `lemma`."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lemma: LemmaName
    a: list[float] | None = None
    b: list[float] | None = None
    u: list[float] | None = None
    v: list[float] | None = None
    w: list[float] | None = None
    z: list[float] | None = None
    v0: list[float] | None = None
    """With u and w, an explicit non-quasiconvexity triple for the construction."""

    lam: PositiveFloat | None = None
    """Neighborhood radius of the three-points search."""

    v_star: list[float] | None = None

    @model_validator(mode="after")
    def _required_inputs(self) -> LemmaTask:
        missing = [name for name in _LEMMA_POINTS[self.lemma] if getattr(self, name) is None]
        if self.lemma == "three-points" and self.lam is None:
            missing.append("lam")
        if self.lemma in ("tuacuctri", "bode2") and self.v_star is None:
            missing.append("v_star")
        if missing:
            raise ValueError(f"{self.lemma} needs {', '.join(missing)}")
        if self.lemma == "tuacuctri":
            given = [name for name in ("u", "w", "v0") if getattr(self, name) is not None]
            if given and len(given) != 3:
                raise ValueError("an explicit triple needs all of u, w, v0")
        return self

    def vectors(self) -> dict[str, list[float]]:
        names = ("a", "b", "u", "v", "w", "z", "v0", "v_star")
        return {name: getattr(self, name) for name in names if getattr(self, name) is not None}


class RunConfig(BaseModel):
    """Configures an entire suite run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    function: str | None = None
    """Catalog name of the function under test. Exactly one of `function` and `expression` must
    be set."""

    expression: str | None = None
    """Expression source of the function under test, over variables x1..x`dim`."""

    dim: PositiveInt | None = None
    """Dimension of `expression`. Required with it, ignored for catalog functions."""

    box: str | None = None
    """Scan box as "lo..hi[,lo..hi...]". Defaults to the function's own default box."""

    seed: int | None = None
    """Seed of every random stream. When unset, QLAB_SEED is used, then 42. The resolved seed is
    echoed into the report."""

    points_per_box: PositiveInt = SamplePlan.points_per_box
    lambdas_per_segment: PositiveInt = SamplePlan.lambdas_per_segment
    directions_per_sphere: PositiveInt = SamplePlan.directions_per_sphere
    refinement_rounds: PositiveInt = SamplePlan.refinement_rounds
    line_points: PositiveInt = SamplePlan.line_points

    checks: list[CheckName] = []
    """Checkers to run, in order."""

    alpha: PositiveFloat | None = None
    """Perturbation bound of the robust checkers. Required when any of them is selected."""

    alpha_star: list[AlphaMethod] = []
    """α* estimators to run after the checks, in order."""

    cap: PositiveFloat = DEFAULT_CAP
    tol: PositiveFloat = DEFAULT_TOL

    lemmas: list[LemmaTask] = []
    """Lemma harnesses to run last, in order."""

    out: str | None = None
    """Where to write the JSON report. Not written when unset."""

    plot: str | None = None
    """Where to write a TSV plot trace (1D functions only)."""

    plot_v_star: list[float] | None = None
    """v* of the plot trace. Defaults to the v* of the first robust violation or construction in
    the run, else 0."""

    tracing_disabled: bool = False
    """Whether tracing is disabled for the run. Timings are recorded either way."""

    workflow_name: str = "qlab suite"
    """The name of the trace wrapping the run."""

    trace_id: str | None = None
    """A custom trace ID. Generated when not given."""

    @model_validator(mode="after")
    def _one_function_source(self) -> RunConfig:
        if (self.function is None) == (self.expression is None):
            raise ValueError("exactly one of function and expression must be set")
        if self.expression is not None and self.dim is None:
            raise ValueError("an expression needs dim")
        return self

    @model_validator(mode="after")
    def _robust_checks_need_alpha(self) -> RunConfig:
        if self.alpha is None and any(c.needs_alpha for c in self.checks):
            raise ValueError("robust checks need alpha")
        return self

    @classmethod
    def build(cls, data: Mapping[str, Any] | None = None, **kwargs: Any) -> RunConfig:
        """Validate `data` (or keyword arguments) into a config.

        Raises:
            ConfigError: naming the first offending field.
        """
        payload = {**(data or {}), **kwargs}
        try:
            return cls.model_validate(payload)
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ConfigError(location or _config_field(first["msg"]), first["msg"]) from None

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        from_env = env_seed()
        return from_env if from_env is not None else DEFAULT_SEED

    def plan(self) -> SamplePlan:
        return SamplePlan(
            seed=self.resolved_seed(),
            points_per_box=self.points_per_box,
            lambdas_per_segment=self.lambdas_per_segment,
            directions_per_sphere=self.directions_per_sphere,
            refinement_rounds=self.refinement_rounds,
            line_points=self.line_points,
        )

    def echo(self) -> dict[str, Any]:
        """The config as it ran: seed resolved, everything else verbatim."""
        return self.model_copy(update={"seed": self.resolved_seed()}).model_dump(mode="json")


def _config_field(message: str) -> str:
    # Cross-field validators report no location; recover it from the message.
    for name in ("dim", "alpha", "function", "expression"):
        if name in message:
            return name
    return "config"


class TraceCtxManager:
    """Creates a trace only if there is no current trace, and manages the trace lifecycle."""

    def __init__(
        self,
        workflow_name: str,
        trace_id: str | None,
        metadata: dict[str, Any] | None,
        disabled: bool,
    ):
        self.trace: Trace | None = None
        self.workflow_name = workflow_name
        self.trace_id = trace_id
        self.metadata = metadata
        self.disabled = disabled

    def __enter__(self) -> TraceCtxManager:
        current_trace = get_current_trace()
        if not current_trace:
            self.trace = trace(
                name=self.workflow_name,
                trace_id=self.trace_id,
                metadata=self.metadata,
                disabled=self.disabled,
            )
            self.trace.start(mark_as_current=True)

        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.trace:
            self.trace.finish(reset_current=True)


@dataclass
class _Target:
    """The resolved inputs of a run."""

    f: FunctionHandle
    box: Box
    plan: SamplePlan
    lemma_points: list[dict[str, Point]] = field(default_factory=list)


def _resolve(config: RunConfig) -> _Target:
    try:
        if config.function is not None:
            f: FunctionHandle = catalog_lookup(config.function)
        else:
            assert config.expression is not None and config.dim is not None
            f = from_expression(config.expression, config.dim)
    except QlabException as e:
        raise ConfigError("function" if config.function else "expression", e.message) from e
    try:
        box = Box.parse(config.box) if config.box else f.default_box
    except QlabException as e:
        raise ConfigError("box", e.message) from e
    if box.dim != f.dim:
        raise ConfigError("box", f"box has dimension {box.dim}, {f.name} has {f.dim}")
    if config.plot and f.dim != 1:
        raise ConfigError("plot", f"plot traces need a 1D function, {f.name} has {f.dim}")
    lemma_points: list[dict[str, Point]] = []
    for i, task in enumerate(config.lemmas):
        points: dict[str, Point] = {}
        for name, values in task.vectors().items():
            if len(values) != f.dim:
                raise ConfigError(
                    f"lemmas.{i}.{name}", f"has dimension {len(values)}, {f.name} has {f.dim}"
                )
            points[name] = np.asarray(values, dtype=float)
        lemma_points.append(points)
    return _Target(f=f, box=box, plan=config.plan(), lemma_points=lemma_points)


def _run_check(name: CheckName, target: _Target, alpha: float | None) -> CheckVerdict:
    f, box, plan = target.f, target.box, target.plan
    plain: dict[CheckName, Callable[[FunctionHandle, Box, SamplePlan], CheckVerdict]] = {
        CheckName.QUASICONVEX: check_quasiconvex_primal,
        CheckName.CONDITION_B: check_condition_b,
        CheckName.QUASIMONOTONE: check_quasimonotone,
        CheckName.MONOTONE: check_monotone,
        CheckName.LSC: check_lsc_sampled,
    }
    if name in plain:
        return plain[name](f, box, plan)
    assert alpha is not None
    if name == CheckName.ROBUST_PRIMAL:
        rp = RobustParams(alpha, plan.directions_per_sphere, DEFAULT_MAGNITUDES)
        return check_robust_primal(f, box, rp, plan)
    if name == CheckName.ROBUST_B:
        return check_robust_condition_b(f, box, alpha, plan)
    return check_robust_pairs(f, box, alpha, plan)


def _lemma_result(
    task: LemmaTask, points: dict[str, Point], target: _Target
) -> tuple[str, dict[str, Any], Point | None]:
    """Run one lemma harness. Returns (status, exported result, v* worth plotting)."""
    f, plan = target.f, target.plan
    if task.lemma == "mvt":
        mvt = mvt_verify(f, points["a"], points["b"], plan)
        applicable = [v for v in mvt.verdicts.values() if v != LemmaVerdict.NOT_APPLICABLE]
        return _worst_lemma_verdict(applicable).value, mvt.export(), None
    if task.lemma == "three-points":
        assert task.lam is not None
        found = three_points_witness(f, points["u"], points["v"], points["w"], task.lam, plan)
        return found.verdict.value, found.export(), None
    if task.lemma == "radial-limit":
        radial = radial_limit_check(f, points["u"], points["v"])
        return radial.verdict.value, radial.export(), None
    if task.lemma == "bode2":
        chain = bode2_chain_check(
            f, points["v_star"], points["u"], points["v"], points["w"], points["z"]
        )
        return chain.verdict.value, chain.export(), None
    triple = (points["u"], points["w"], points["v0"]) if "v0" in points else None
    construction = tuacuctri_construct(f, points["v_star"], target.box, plan, triple=triple)
    return construction.verdict.value, construction.export(), construction.v_star


_VERDICT_ORDER = (
    LemmaVerdict.FAILS_AT_SCALE,
    LemmaVerdict.PRECONDITION_VIOLATED,
    LemmaVerdict.INCONCLUSIVE,
    LemmaVerdict.NOT_FOUND_AT_SCALE,
    LemmaVerdict.PREMISE_UNMET,
    LemmaVerdict.HOLDS,
)


def _worst_lemma_verdict(verdicts: list[LemmaVerdict]) -> LemmaVerdict:
    for candidate in _VERDICT_ORDER:
        if candidate in verdicts:
            return candidate
    return LemmaVerdict.NOT_APPLICABLE


def _span_error(span: Span[Any], e: QlabException, step: str) -> None:
    attach_error_to_span(
        span,
        SpanError(message=f"Error in {step}", data={"error": e.message, "type": type(e).__name__}),
    )


def _duration(span: Span[Any]) -> float:
    return span.duration or 0.0


def run_suite(config: RunConfig) -> Report:
    """Run the configured checks, then the α* estimators, then the lemma harnesses.

    The report is written to `config.out` (and a plot trace to `config.plot`) when set.

    Raises:
        ConfigError: the function, box or a lemma input cannot be resolved.
    """
    target = _resolve(config)
    f, plan = target.f, target.plan
    started_at = datetime.datetime.now(datetime.timezone.utc).isoformat()
    t0 = time.perf_counter()
    entries: list[ReportEntry] = []
    skipped = SkipStats()
    plot_v_star: Point | None = None
    echo = config.echo()
    logger.debug(f"Running suite on {f.name} over {target.box} with seed {plan.seed}")

    with TraceCtxManager(
        workflow_name=config.workflow_name,
        trace_id=config.trace_id,
        metadata={"function": f.name, "seed": plan.seed},
        disabled=config.tracing_disabled,
    ):
        for name in config.checks:
            with check_span(name.value, f.name, disabled=config.tracing_disabled) as check:
                try:
                    verdict = _run_check(name, target, config.alpha)
                except QlabException as e:
                    _span_error(check, e, f"check {name.value}")
                    raise
                check.span_data.status = verdict.status.value
                check.span_data.pairs_scanned = verdict.pairs_scanned
                check.span_data.points_skipped = verdict.points_skipped
            skipped = SkipStats(
                points_skipped=skipped.points_skipped + verdict.points_skipped,
                nan_converted=skipped.nan_converted + verdict.nan_converted,
            )
            if plot_v_star is None and isinstance(verdict.witness, RobustPrimalViolation):
                plot_v_star = verdict.witness.v_star
            entries.append(
                ReportEntry(
                    kind=EntryKind.CHECK,
                    name=name.value,
                    status=verdict.status.value,
                    result=verdict.export(),
                    duration_seconds=_duration(check),
                )
            )

        for method in config.alpha_star:
            with estimator_span(method.value, f.name, disabled=config.tracing_disabled) as est:
                try:
                    estimate = estimate_alpha_star(
                        f, target.box, method, config.cap, config.tol, plan
                    )
                except QlabException as e:
                    _span_error(est, e, f"alpha* {method.value}")
                    raise
                est.span_data.lower = estimate.lower
                est.span_data.upper = estimate.upper
                est.span_data.steps = len(estimate.trace)
            entries.append(
                ReportEntry(
                    kind=EntryKind.ALPHA_STAR,
                    name=method.value,
                    status="bracketed",
                    result=estimate.export(),
                    duration_seconds=_duration(est),
                )
            )

        for task, points in zip(config.lemmas, target.lemma_points):
            with lemma_span(task.lemma, f.name, disabled=config.tracing_disabled) as lemma:
                try:
                    status, result, v_star = _lemma_result(task, points, target)
                except PreconditionViolated as e:
                    status = LemmaVerdict.PRECONDITION_VIOLATED.value
                    result, v_star = {"failed": list(e.failed), "message": e.message}, None
                except PerturbationStillQuasiconvexAtScale as e:
                    status = LemmaVerdict.NOT_FOUND_AT_SCALE.value
                    result, v_star = {"message": e.message}, None
                except QlabException as e:
                    _span_error(lemma, e, f"lemma {task.lemma}")
                    raise
                lemma.span_data.verdict = status
            if plot_v_star is None and v_star is not None:
                plot_v_star = v_star
            entries.append(
                ReportEntry(
                    kind=EntryKind.LEMMA,
                    name=task.lemma,
                    status=status,
                    result=result,
                    duration_seconds=_duration(lemma),
                )
            )

        report = Report(
            version=__version__,
            config=echo,
            function=f.describe(),
            plan=plan.export(),
            entries=entries,
            skipped=skipped,
            exit_code=exit_code_for(entry.status for entry in entries),
            started_at=started_at,
            duration_seconds=time.perf_counter() - t0,
        )
        if config.out or config.plot:
            with custom_span("write outputs", {"out": config.out, "plot": config.plot}):
                if config.out:
                    report.write(config.out)
                if config.plot:
                    if config.plot_v_star is not None:
                        plot_v_star = np.asarray(config.plot_v_star, dtype=float)
                    star = plot_v_star if plot_v_star is not None else np.zeros(f.dim)
                    write_plot_trace(config.plot, f, star, target.box)

    logger.debug(f"Suite on {f.name} finished with exit code {report.exit_code}")
    return report
