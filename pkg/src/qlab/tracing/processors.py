from __future__ import annotations

import logging
from typing import Any

from .logger import logger
from .processor_interface import TracingProcessor
from .spans import Span
from .traces import Trace


class LoggingProcessor(TracingProcessor):
    """Writes trace boundaries and every finished span's export to the `qlab.tracing` logger."""

    def __init__(self, level: int = logging.DEBUG) -> None:
        self._level = level

    def on_trace_start(self, trace: Trace) -> None:
        logger.log(self._level, f"trace start: {trace.name} ({trace.trace_id})")

    def on_trace_end(self, trace: Trace) -> None:
        logger.log(self._level, f"trace end: {trace.name} ({trace.trace_id})")

    def on_span_start(self, span: Span[Any]) -> None:
        pass

    def on_span_end(self, span: Span[Any]) -> None:
        if span.error is not None:
            logger.log(self._level, f"span failed: {span.error['message']}")
        logger.log(self._level, f"span: {span.export()}")
