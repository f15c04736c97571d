from __future__ import annotations

import json

import pytest

from qlab.catalog import catalog_lookup
from qlab.exceptions import DimensionError
from qlab.report import (
    EXIT_OK,
    EXIT_UNDECIDED,
    EXIT_VIOLATED,
    Report,
    exit_code_for,
    write_plot_trace,
)
from qlab.run import RunConfig, run_suite


@pytest.mark.parametrize(
    "statuses, code",
    [
        ([], EXIT_OK),
        (["satisfied", "holds", "bracketed", "not_applicable"], EXIT_OK),
        (["satisfied", "violated"], EXIT_VIOLATED),
        (["fails_at_scale", "inconclusive"], EXIT_VIOLATED),
        (["satisfied", "inconclusive"], EXIT_UNDECIDED),
        (["not_found_at_scale"], EXIT_UNDECIDED),
        (["premise_unmet"], EXIT_UNDECIDED),
        (["precondition_violated", "holds"], EXIT_UNDECIDED),
    ],
)
def test_exit_codes(statuses: list[str], code: int):
    assert exit_code_for(statuses) == code


def test_plot_trace_columns(tmp_path):
    path = tmp_path / "linear.tsv"
    rows = write_plot_trace(path, catalog_lookup("linear"), [0.5], points=5)
    assert rows == 5
    lines = path.read_text().splitlines()
    assert lines[0] == "x\tphi\tphi_vstar"
    assert lines[1] == "-2.0\t-2.0\t-3.0"
    assert lines[3] == "0.0\t0.0\t0.0"
    assert len(lines) == 6


def test_plot_trace_is_one_dimensional(tmp_path):
    with pytest.raises(DimensionError):
        write_plot_trace(tmp_path / "saddle.tsv", catalog_lookup("saddle"), [0.0, 0.0])


def _config(**extra) -> RunConfig:
    return RunConfig.build(
        function="neg_abs",
        checks=["quasiconvex", "cond-b"],
        points_per_box=48,
        lambdas_per_segment=9,
        line_points=513,
        **extra,
    )


def test_report_round_trips_through_json(tmp_path):
    out = tmp_path / "report.json"
    report = run_suite(_config(out=str(out)))
    loaded = json.loads(out.read_text())
    assert loaded["tool"] == "qlab"
    assert loaded["exit_code"] == EXIT_VIOLATED
    assert loaded["config"]["out"] == str(out)
    assert [e["status"] for e in loaded["entries"]] == ["violated", "violated"]
    assert Report.model_validate(loaded).reproducible_dump() == report.reproducible_dump()


def test_reruns_reproduce_everything_but_the_timings():
    first = run_suite(_config())
    second = run_suite(_config())
    assert first.reproducible_dump() == second.reproducible_dump()
    dumped = first.reproducible_dump()
    assert "started_at" not in dumped
    assert all("duration_seconds" not in e for e in dumped["entries"])


def test_plot_follows_the_robust_witness(tmp_path):
    plot = tmp_path / "cubic.tsv"
    report = run_suite(
        RunConfig.build(
            function="cubic",
            checks=["robust-primal"],
            alpha=0.5,
            points_per_box=48,
            lambdas_per_segment=9,
            line_points=513,
            plot=str(plot),
        )
    )
    v_star = report.entries[0].result["witness"]["v_star"][0]
    lines = plot.read_text().splitlines()
    assert len(lines) == 1002
    x, phi, phi_vstar = (float(c) for c in lines[1].split("\t"))
    assert x == -2.0
    assert phi_vstar == pytest.approx(phi + v_star * x)
