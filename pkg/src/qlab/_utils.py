from __future__ import annotations

import math
from collections.abc import Iterable
from typing import Any, Union

import numpy as np
import numpy.typing as npt

from .tracing import Span, SpanError

JsonFloat = Union[float, str]


def json_float(value: float) -> JsonFloat:
    """Finite floats pass through (shortest round-trip repr on serialization); non-finite values
    become the strings "inf", "-inf" and "nan", which JSON cannot carry as numbers."""
    value = float(value)
    if math.isfinite(value):
        return value
    if math.isnan(value):
        return "nan"
    return "inf" if value > 0 else "-inf"


def json_vector(values: npt.ArrayLike | Iterable[float]) -> list[JsonFloat]:
    return [json_float(v) for v in np.asarray(values, dtype=float).ravel()]


def attach_error_to_span(span: Span[Any], error: SpanError) -> None:
    span.set_error(error)
