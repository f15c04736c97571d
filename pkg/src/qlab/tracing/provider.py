from __future__ import annotations

import threading
from typing import Any

from .. import _debug
from . import context
from .logger import logger
from .processor_interface import TracingProcessor
from .spans import NoOpSpan, Span, TSpanData
from .traces import NoOpTrace, Trace


class ProcessorFanout(TracingProcessor):
    """Forwards every event to the registered processors, in registration order."""

    def __init__(self) -> None:
        self._processors: tuple[TracingProcessor, ...] = ()
        self._lock = threading.Lock()

    def add(self, processor: TracingProcessor) -> None:
        with self._lock:
            self._processors = (*self._processors, processor)

    def replace(self, processors: list[TracingProcessor]) -> None:
        with self._lock:
            self._processors = tuple(processors)

    def on_trace_start(self, trace: Trace) -> None:
        for p in self._processors:
            p.on_trace_start(trace)

    def on_trace_end(self, trace: Trace) -> None:
        for p in self._processors:
            p.on_trace_end(trace)

    def on_span_start(self, span: Span[Any]) -> None:
        for p in self._processors:
            p.on_span_start(span)

    def on_span_end(self, span: Span[Any]) -> None:
        for p in self._processors:
            p.on_span_end(span)

    def shutdown(self) -> None:
        for p in self._processors:
            try:
                p.shutdown()
            except Exception as e:
                logger.error(f"Error shutting down trace processor {p}: {e}")


class TraceProvider:
    """Creates traces and spans, and decides whether they are recorded.

    Nothing is recorded when tracing is disabled (globally or per call), outside a trace, or under
    a no-op parent.
    """

    def __init__(self) -> None:
        self.processors = ProcessorFanout()
        self.disabled = _debug.DISABLE_TRACING

    def create_trace(
        self,
        name: str,
        trace_id: str | None = None,
        metadata: dict[str, Any] | None = None,
        disabled: bool = False,
    ) -> Trace:
        if self.disabled or disabled:
            logger.debug(f"Tracing disabled, trace {name} is a no-op")
            return NoOpTrace()
        return Trace(name, trace_id, metadata, self.processors)

    def create_span(
        self,
        span_data: TSpanData,
        span_id: str | None = None,
        parent: Trace | Span[Any] | None = None,
        disabled: bool = False,
    ) -> Span[TSpanData]:
        if self.disabled or disabled:
            return NoOpSpan(span_data)

        if parent is None:
            current_trace = context.active_trace()
            if current_trace is None:
                # Checkers called directly, outside a suite run.
                return NoOpSpan(span_data)
            parent = context.active_span() or current_trace

        if not parent.recorded:
            return NoOpSpan(span_data)
        parent_id = parent.span_id if isinstance(parent, Span) else None
        return Span(span_data, parent.trace_id, parent_id, self.processors, span_id=span_id)

    def shutdown(self) -> None:
        logger.debug("Shutting down trace provider")
        self.processors.shutdown()


GLOBAL_TRACE_PROVIDER = TraceProvider()
