from __future__ import annotations

from typing import Any

from . import context
from .logger import logger
from .processor_interface import TracingProcessor


class Trace:
    """The root of a tracing tree. A suite run opens one, unless it runs inside a trace already.

    A trace without a processor is a [`NoOpTrace`][qlab.tracing.traces.NoOpTrace]: it can still be
    made current, which keeps every span under it unrecorded.
    """

    def __init__(
        self,
        name: str,
        trace_id: str | None,
        metadata: dict[str, Any] | None,
        processor: TracingProcessor | None,
    ):
        self.name = name
        self.trace_id = trace_id or context.gen_trace_id()
        self.metadata = metadata
        self._processor = processor
        self._started = False
        self._token: context.TraceToken | None = None

    @property
    def recorded(self) -> bool:
        return self._processor is not None

    def start(self, mark_as_current: bool = False) -> None:
        if self._started:
            logger.warning(f"Trace {self.trace_id} already started")
            return
        self._started = True
        if self._processor is not None:
            self._processor.on_trace_start(self)
        if mark_as_current:
            self._token = context.activate_trace(self)

    def finish(self, reset_current: bool = False) -> None:
        if not self._started:
            return
        if self._processor is not None:
            self._processor.on_trace_end(self)
        if reset_current and self._token is not None:
            context.restore_trace(self._token)
            self._token = None

    def export(self) -> dict[str, Any] | None:
        if not self.recorded:
            return None
        return {
            "object": "trace",
            "id": self.trace_id,
            "name": self.name,
            "metadata": self.metadata,
        }

    def __enter__(self) -> Trace:
        self.start(mark_as_current=True)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.finish(reset_current=exc_type is not GeneratorExit)


class NoOpTrace(Trace):
    def __init__(self) -> None:
        super().__init__("no-op", "no-op", None, None)
