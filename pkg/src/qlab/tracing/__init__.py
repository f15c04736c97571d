import atexit

from .context import gen_span_id, gen_trace_id
from .create import (
    check_span,
    custom_span,
    estimator_span,
    get_current_span,
    get_current_trace,
    lemma_span,
    trace,
)
from .processor_interface import TracingProcessor
from .processors import LoggingProcessor
from .provider import GLOBAL_TRACE_PROVIDER
from .span_data import (
    CheckSpanData,
    CustomSpanData,
    EstimatorSpanData,
    LemmaSpanData,
    SpanData,
)
from .spans import NoOpSpan, Span, SpanError
from .traces import NoOpTrace, Trace

__all__ = [
    "add_trace_processor",
    "check_span",
    "custom_span",
    "estimator_span",
    "get_current_span",
    "get_current_trace",
    "lemma_span",
    "set_trace_processors",
    "set_tracing_disabled",
    "trace",
    "Trace",
    "NoOpTrace",
    "Span",
    "NoOpSpan",
    "SpanError",
    "SpanData",
    "CheckSpanData",
    "CustomSpanData",
    "EstimatorSpanData",
    "LemmaSpanData",
    "LoggingProcessor",
    "TracingProcessor",
    "gen_trace_id",
    "gen_span_id",
]


def add_trace_processor(processor: TracingProcessor) -> None:
    """Register a processor. It receives every recorded trace and span from now on."""
    GLOBAL_TRACE_PROVIDER.processors.add(processor)


def set_trace_processors(processors: list[TracingProcessor]) -> None:
    """Replace all registered processors."""
    GLOBAL_TRACE_PROVIDER.processors.replace(processors)


def set_tracing_disabled(disabled: bool) -> None:
    """Disable (or re-enable) recording for every run. Spans are still timed."""
    GLOBAL_TRACE_PROVIDER.disabled = disabled


atexit.register(GLOBAL_TRACE_PROVIDER.shutdown)
