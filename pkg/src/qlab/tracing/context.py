"""The active trace and span of the current context, and id and timestamp helpers."""

from __future__ import annotations

import contextvars
import uuid
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Any

from .logger import logger

if TYPE_CHECKING:
    from .spans import Span
    from .traces import Trace

_active_trace: contextvars.ContextVar[Trace | None] = contextvars.ContextVar(
    "qlab_active_trace", default=None
)
_active_span: contextvars.ContextVar[Span[Any] | None] = contextvars.ContextVar(
    "qlab_active_span", default=None
)

TraceToken = contextvars.Token["Trace | None"]
SpanToken = contextvars.Token["Span[Any] | None"]


def active_trace() -> Trace | None:
    return _active_trace.get()


def active_span() -> Span[Any] | None:
    return _active_span.get()


def activate_trace(trace: Trace) -> TraceToken:
    logger.debug(f"Activating trace {trace.trace_id}")
    return _active_trace.set(trace)


def restore_trace(token: TraceToken) -> None:
    _active_trace.reset(token)


def activate_span(span: Span[Any]) -> SpanToken:
    return _active_span.set(span)


def restore_span(token: SpanToken) -> None:
    _active_span.reset(token)


def gen_trace_id() -> str:
    return f"trace_{uuid.uuid4().hex}"


def gen_span_id() -> str:
    return f"span_{uuid.uuid4().hex[:24]}"


def utc_now() -> str:
    """ISO 8601 timestamp in UTC."""
    return datetime.now(timezone.utc).isoformat()
