from __future__ import annotations

from collections.abc import Sequence


class QlabException(Exception):
    """Base class for all exceptions raised by qlab."""

    message: str

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class UserError(QlabException):
    """Raised when the library is called with arguments that make no sense."""


class ConfigError(QlabException):
    """Raised when a run configuration is invalid. `field` points at the offending field."""

    field: str

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ExpressionSyntaxError(QlabException):
    """Raised by the expression parser on malformed input."""

    position: int
    """Zero-based character offset in the source text."""

    def __init__(self, position: int, message: str):
        self.position = position
        super().__init__(f"at position {position}: {message}")


class UnknownIdentifier(QlabException):
    """Raised when an expression calls a function the language does not define."""


class ArityError(QlabException):
    """Raised when a built-in is called with the wrong number of arguments."""


class DimensionError(QlabException):
    """Raised when a point, vector or variable index does not match the declared dimension."""


class DegenerateSegment(QlabException):
    """Raised when a segment is requested between two identical points."""


class DegenerateEndpoints(QlabException):
    """Raised by the mean value harness when a == b."""


class UnknownFunction(QlabException):
    """Raised when a catalog lookup misses."""


class AllSamplesInfinite(QlabException):
    """Raised when every sampled neighbour of a point lies outside dom φ."""


class PointOutsideDomain(QlabException):
    """Raised when an operation needs φ(x) finite and it is +∞."""


class PreconditionViolated(QlabException):
    """Raised when a lemma harness is called outside its hypotheses."""

    failed: tuple[str, ...]
    """Names of the hypotheses that failed numerically."""

    def __init__(self, failed: Sequence[str], message: str | None = None):
        self.failed = tuple(failed)
        super().__init__(message or f"hypotheses failed: {', '.join(self.failed)}")


class PerturbationStillQuasiconvexAtScale(QlabException):
    """Raised when the construction needs a non-quasiconvex perturbation and the scan found none."""
