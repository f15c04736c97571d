from __future__ import annotations

from typing import Any

from . import context
from .logger import logger
from .provider import GLOBAL_TRACE_PROVIDER
from .span_data import CheckSpanData, CustomSpanData, EstimatorSpanData, LemmaSpanData
from .spans import Span
from .traces import Trace


def trace(
    name: str,
    trace_id: str | None = None,
    metadata: dict[str, Any] | None = None,
    disabled: bool = False,
) -> Trace:
    """Create a trace. It is not started: use it as a context manager (`with trace(...):`) or
    call `start()` and `finish()` yourself.

    Args:
        name: The name of the trace, e.g. "qlab suite".
        trace_id: Trace ID. Generated when not given.
        metadata: Attached to the trace export. The suite passes the function name and seed.
        disabled: If True, a no-op trace is returned.
    """
    if context.active_trace() is not None:
        logger.warning(f"Creating trace {name} inside another trace; new spans nest in {name}")
    return GLOBAL_TRACE_PROVIDER.create_trace(name, trace_id, metadata, disabled)


def get_current_trace() -> Trace | None:
    return context.active_trace()


def get_current_span() -> Span[Any] | None:
    return context.active_span()


def check_span(
    checker: str,
    function: str,
    parent: Trace | Span[Any] | None = None,
    disabled: bool = False,
) -> Span[CheckSpanData]:
    """Create a span around one checker run. The caller fills in the status and scan counts on
    `span.span_data` before the span finishes.

    Args:
        checker: Checker name, e.g. "quasiconvex" or "robust-pairs".
        function: Name of the function under test.
        parent: The parent span or trace. Defaults to the active span, then the active trace.
        disabled: If True, the span is not recorded. It is still timed.
    """
    return GLOBAL_TRACE_PROVIDER.create_span(
        CheckSpanData(checker=checker, function=function), parent=parent, disabled=disabled
    )


def estimator_span(
    method: str,
    function: str,
    parent: Trace | Span[Any] | None = None,
    disabled: bool = False,
) -> Span[EstimatorSpanData]:
    """Create a span around one α* bisection."""
    return GLOBAL_TRACE_PROVIDER.create_span(
        EstimatorSpanData(method=method, function=function), parent=parent, disabled=disabled
    )


def lemma_span(
    lemma: str,
    function: str,
    parent: Trace | Span[Any] | None = None,
    disabled: bool = False,
) -> Span[LemmaSpanData]:
    return GLOBAL_TRACE_PROVIDER.create_span(
        LemmaSpanData(lemma=lemma, function=function), parent=parent, disabled=disabled
    )


def custom_span(
    name: str,
    data: dict[str, Any] | None = None,
    parent: Trace | Span[Any] | None = None,
    disabled: bool = False,
) -> Span[CustomSpanData]:
    """Create a span for a step that is not a checker, estimator or lemma, such as writing the
    report."""
    return GLOBAL_TRACE_PROVIDER.create_span(
        CustomSpanData(name=name, data=data or {}), parent=parent, disabled=disabled
    )
