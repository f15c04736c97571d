from __future__ import annotations

import abc
from typing import Any


class SpanData(abc.ABC):
    @abc.abstractmethod
    def export(self) -> dict[str, Any]:
        pass

    @property
    @abc.abstractmethod
    def type(self) -> str:
        pass


class CheckSpanData(SpanData):
    """A single property checker run over one function."""

    __slots__ = ("checker", "function", "status", "pairs_scanned", "points_skipped")

    def __init__(
        self,
        checker: str,
        function: str,
        status: str | None = None,
        pairs_scanned: int | None = None,
        points_skipped: int | None = None,
    ):
        self.checker = checker
        self.function = function
        self.status = status
        self.pairs_scanned = pairs_scanned
        self.points_skipped = points_skipped

    @property
    def type(self) -> str:
        return "check"

    def export(self) -> dict[str, Any]:
        return {
            "type": self.type,
            "checker": self.checker,
            "function": self.function,
            "status": self.status,
            "pairs_scanned": self.pairs_scanned,
            "points_skipped": self.points_skipped,
        }


class EstimatorSpanData(SpanData):
    """An α* bisection."""

    __slots__ = ("method", "function", "lower", "upper", "steps")

    def __init__(
        self,
        method: str,
        function: str,
        lower: float | None = None,
        upper: float | None = None,
        steps: int | None = None,
    ):
        self.method = method
        self.function = function
        self.lower = lower
        self.upper = upper
        self.steps = steps

    @property
    def type(self) -> str:
        return "estimator"

    def export(self) -> dict[str, Any]:
        return {
            "type": self.type,
            "method": self.method,
            "function": self.function,
            "lower": self.lower,
            "upper": self.upper,
            "steps": self.steps,
        }


class LemmaSpanData(SpanData):
    __slots__ = ("lemma", "function", "verdict")

    def __init__(self, lemma: str, function: str, verdict: str | None = None):
        self.lemma = lemma
        self.function = function
        self.verdict = verdict

    @property
    def type(self) -> str:
        return "lemma"

    def export(self) -> dict[str, Any]:
        return {
            "type": self.type,
            "lemma": self.lemma,
            "function": self.function,
            "verdict": self.verdict,
        }


class CustomSpanData(SpanData):
    __slots__ = ("name", "data")

    def __init__(self, name: str, data: dict[str, Any]):
        self.name = name
        self.data = data

    @property
    def type(self) -> str:
        return "custom"

    def export(self) -> dict[str, Any]:
        return {
            "type": self.type,
            "name": self.name,
            "data": self.data,
        }
