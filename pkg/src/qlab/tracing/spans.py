from __future__ import annotations

import time
from typing import Any, Generic, TypeVar

from typing_extensions import TypedDict

from . import context
from .logger import logger
from .processor_interface import TracingProcessor
from .span_data import SpanData

TSpanData = TypeVar("TSpanData", bound=SpanData)


class SpanError(TypedDict):
    message: str
    data: dict[str, Any] | None


class Span(Generic[TSpanData]):
    """One timed step of a run: a checker, an α* estimator, a lemma harness or a custom step.

    Use it as a context manager to make it the active span while it runs. Spans created outside a
    recording trace are [`NoOpSpan`][qlab.tracing.spans.NoOpSpan]s: they still measure their
    duration but reach no processor and export nothing.
    """

    def __init__(
        self,
        span_data: TSpanData,
        trace_id: str,
        parent_id: str | None,
        processor: TracingProcessor | None,
        span_id: str | None = None,
    ):
        self.span_data = span_data
        self.trace_id = trace_id
        self.parent_id = parent_id
        self.span_id = span_id or context.gen_span_id()
        self.started_at: str | None = None
        self.ended_at: str | None = None
        self.error: SpanError | None = None
        self._processor = processor
        self._clock: tuple[float, float | None] | None = None
        self._token: context.SpanToken | None = None

    @property
    def recorded(self) -> bool:
        return self._processor is not None

    @property
    def duration(self) -> float | None:
        """Monotonic seconds between start and finish; None until finished."""
        if self._clock is None or self._clock[1] is None:
            return None
        return self._clock[1] - self._clock[0]

    def start(self, mark_as_current: bool = False) -> None:
        if self._clock is not None:
            logger.warning(f"Span {self.span_id} already started")
            return
        if self._processor is not None:
            self.started_at = context.utc_now()
            self._processor.on_span_start(self)
        if mark_as_current:
            self._token = context.activate_span(self)
        self._clock = (time.perf_counter(), None)

    def finish(self, reset_current: bool = False) -> None:
        if self._clock is None or self._clock[1] is not None:
            logger.warning(f"Span {self.span_id} finished twice or never started")
            return
        self._clock = (self._clock[0], time.perf_counter())
        if reset_current and self._token is not None:
            context.restore_span(self._token)
            self._token = None
        if self._processor is not None:
            self.ended_at = context.utc_now()
            self._processor.on_span_end(self)

    def set_error(self, error: SpanError) -> None:
        if self.recorded:
            self.error = error

    def export(self) -> dict[str, Any] | None:
        if not self.recorded:
            return None
        return {
            "object": "trace.span",
            "id": self.span_id,
            "trace_id": self.trace_id,
            "parent_id": self.parent_id,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "duration": self.duration,
            "span_data": self.span_data.export(),
            "error": self.error,
        }

    def __enter__(self) -> Span[TSpanData]:
        self.start(mark_as_current=True)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        # A generator closed in another context cannot reset the context var it set.
        self.finish(reset_current=exc_type is not GeneratorExit)


class NoOpSpan(Span[TSpanData]):
    """A span that is timed but never reaches a processor."""

    def __init__(self, span_data: TSpanData):
        super().__init__(span_data, trace_id="no-op", parent_id=None, processor=None)
        self.span_id = "no-op"
