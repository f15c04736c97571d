from __future__ import annotations

import pytest

from qlab.geometry import SamplePlan
from qlab.tracing import set_trace_processors
from qlab.tracing.provider import GLOBAL_TRACE_PROVIDER

from .testing_processor import RECORDER


# This fixture will run once before any tests are executed
@pytest.fixture(scope="session", autouse=True)
def setup_span_processor():
    set_trace_processors([RECORDER])


# This fixture will run before each test
@pytest.fixture(autouse=True)
def clear_span_processor():
    RECORDER.clear()


# The seed override must not leak in from the environment running the tests.
@pytest.fixture(autouse=True)
def clear_seed_override(monkeypatch):
    monkeypatch.delenv("QLAB_SEED", raising=False)


# This fixture will run after all tests end
@pytest.fixture(autouse=True, scope="session")
def shutdown_trace_provider():
    yield
    GLOBAL_TRACE_PROVIDER.shutdown()


@pytest.fixture
def small_plan() -> SamplePlan:
    """A plan small enough for unit tests; acceptance runs use the default plan."""
    return SamplePlan(points_per_box=48, lambdas_per_segment=9, line_points=513)
