from __future__ import annotations

import abc
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .spans import Span
    from .traces import Trace


class TracingProcessor(abc.ABC):
    """Receives every recorded trace and span.

    Callbacks run synchronously inside the suite run, so they should be quick and must not raise.
    """

    @abc.abstractmethod
    def on_trace_start(self, trace: Trace) -> None:
        """A suite run (or a user trace) began."""

    @abc.abstractmethod
    def on_trace_end(self, trace: Trace) -> None:
        """A trace finished. Its spans have all ended by now."""

    @abc.abstractmethod
    def on_span_start(self, span: Span[Any]) -> None:
        """A step began. Its span data is not filled in yet."""

    @abc.abstractmethod
    def on_span_end(self, span: Span[Any]) -> None:
        """A step finished, with its status, counts and any error on the span."""

    def shutdown(self) -> None:
        """Called once at interpreter exit."""
