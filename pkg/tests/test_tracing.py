from __future__ import annotations

import logging
from typing import Any

import pytest

from qlab import run as run_module
from qlab.exceptions import UserError
from qlab.run import RunConfig, run_suite
from qlab.tracing import (
    LoggingProcessor,
    Span,
    Trace,
    check_span,
    custom_span,
    get_current_span,
    get_current_trace,
    lemma_span,
    set_trace_processors,
    set_tracing_disabled,
    trace,
)

from .testing_processor import RECORDER, fetch_events, fetch_ordered_spans, fetch_traces

### HELPERS


def standard_span_checks(
    span: Span[Any], trace_id: str, parent_id: str | None, span_type: str
) -> None:
    assert span.span_id is not None
    assert span.trace_id == trace_id
    assert span.parent_id == parent_id
    assert span.duration is not None and span.duration >= 0.0
    assert span.span_data.type == span_type


def standard_trace_checks(trace: Trace, name_check: str | None = None) -> None:
    assert trace.trace_id is not None

    if name_check:
        assert trace.name == name_check


SMALL: dict[str, Any] = {"points_per_box": 48, "lambdas_per_segment": 9, "line_points": 513}

### TESTS


def simple_tracing():
    x = trace("test")
    x.start()

    span_1 = check_span("quasiconvex", "cubic", parent=x)
    span_1.start()
    span_1.finish()

    span_2 = custom_span(name="custom_1", parent=x)
    span_2.start()

    span_3 = lemma_span("mvt", "cubic", parent=span_2)
    span_3.start()
    span_3.finish()

    span_2.finish()

    x.finish()


def test_simple_tracing():
    simple_tracing()

    spans = fetch_ordered_spans()
    assert len(spans) == 3
    traces = fetch_traces()
    assert len(traces) == 1
    trace_id = traces[0].trace_id
    standard_trace_checks(traces[0], name_check="test")

    standard_span_checks(spans[0], trace_id=trace_id, parent_id=None, span_type="check")
    standard_span_checks(spans[1], trace_id=trace_id, parent_id=None, span_type="custom")
    standard_span_checks(
        spans[2], trace_id=trace_id, parent_id=spans[1].span_id, span_type="lemma"
    )
    assert fetch_events() == [
        "trace_start",
        "span_start",
        "span_end",
        "span_start",
        "span_start",
        "span_end",
        "span_end",
        "trace_end",
    ]


def ctxmanager_spans():
    with trace(name="test", trace_id="trace_123", metadata={"seed": 7}):
        with custom_span(name="custom_1") as span_1:
            with check_span("cond-b", "abs") as span_2:
                assert get_current_span() is span_2
            assert get_current_span() is span_1


def test_ctxmanager_spans():
    ctxmanager_spans()

    spans = fetch_ordered_spans()
    assert len(spans) == 2
    traces = fetch_traces()
    assert len(traces) == 1
    assert traces[0].export() == {
        "object": "trace",
        "id": "trace_123",
        "name": "test",
        "metadata": {"seed": 7},
    }

    standard_span_checks(spans[0], trace_id="trace_123", parent_id=None, span_type="custom")
    standard_span_checks(
        spans[1], trace_id="trace_123", parent_id=spans[0].span_id, span_type="check"
    )
    assert get_current_trace() is None
    assert get_current_span() is None


def test_spans_outside_a_trace_are_not_recorded():
    with check_span("quasiconvex", "cubic") as span:
        pass
    assert span.export() is None
    assert span.duration is not None
    assert fetch_ordered_spans() == []


def test_span_export():
    with trace(name="test"):
        with check_span("lsc", "step") as span:
            span.span_data.status = "satisfied"
            span.span_data.pairs_scanned = 12
    exported = span.export()
    assert exported is not None
    assert exported["object"] == "trace.span"
    assert exported["span_data"] == {
        "type": "check",
        "checker": "lsc",
        "function": "step",
        "status": "satisfied",
        "pairs_scanned": 12,
        "points_skipped": None,
    }
    assert exported["error"] is None


def test_suite_run_is_one_trace():
    config = RunConfig.build(
        {
            "function": "cubic",
            "checks": ["quasiconvex", "monotone"],
            "lemmas": [{"lemma": "radial-limit", "u": [0.0], "v": [1.0]}],
            **SMALL,
        }
    )
    run_suite(config)

    traces = fetch_traces()
    assert len(traces) == 1
    standard_trace_checks(traces[0], name_check="qlab suite")
    trace_id = traces[0].trace_id

    spans = fetch_ordered_spans()
    assert [s.span_data.type for s in spans] == ["check", "check", "lemma"]
    for span in spans:
        standard_span_checks(span, trace_id, None, span.span_data.type)
    assert [s.span_data.export()["status"] for s in spans[:2]] == ["satisfied", "violated"]
    assert spans[2].span_data.export()["verdict"] == "holds"


def test_suite_run_inside_an_existing_trace_joins_it():
    with trace(name="outer") as outer:
        run_suite(RunConfig.build(function="cubic", checks=["quasiconvex"], **SMALL))

    traces = fetch_traces()
    assert [t.name for t in traces] == ["outer"]
    assert fetch_ordered_spans()[0].trace_id == outer.trace_id


def test_tracing_disabled_per_run():
    run_suite(
        RunConfig.build(
            function="cubic", checks=["quasiconvex"], tracing_disabled=True, **SMALL
        )
    )
    assert fetch_traces() == []
    assert fetch_ordered_spans() == []


def test_tracing_disabled_globally():
    set_tracing_disabled(True)
    try:
        run_suite(RunConfig.build(function="cubic", checks=["quasiconvex"], **SMALL))
    finally:
        set_tracing_disabled(False)
    assert fetch_traces() == []
    assert fetch_ordered_spans() == []


def test_checker_errors_are_attached_to_the_span(mocker):
    mocker.patch.object(
        run_module, "check_quasiconvex_primal", side_effect=UserError("scan failed")
    )
    with pytest.raises(UserError):
        run_suite(RunConfig.build(function="cubic", checks=["quasiconvex"], **SMALL))

    spans = fetch_ordered_spans()
    assert len(spans) == 1
    assert spans[0].error == {
        "message": "Error in check quasiconvex",
        "data": {"error": "scan failed", "type": "UserError"},
    }
    assert get_current_trace() is None


def test_logging_processor(caplog):
    caplog.set_level(logging.DEBUG, logger="qlab.tracing")
    set_trace_processors([RECORDER, LoggingProcessor()])
    try:
        with trace(name="logged", trace_id="trace_log"):
            with check_span("quasiconvex", "abs") as span:
                span.span_data.status = "satisfied"
    finally:
        set_trace_processors([RECORDER])

    messages = [r.getMessage() for r in caplog.records if r.name == "qlab.tracing"]
    assert "trace start: logged (trace_log)" in messages
    assert "trace end: logged (trace_log)" in messages
    assert any(m.startswith("span: ") and "'status': 'satisfied'" in m for m in messages)
