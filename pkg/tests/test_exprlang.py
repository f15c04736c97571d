from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlab.exceptions import ArityError, DimensionError, ExpressionSyntaxError, UnknownIdentifier
from qlab.exprlang import EvalStats, Expr, Num, evaluate, evaluate_many, format_expr, parse
from qlab.geometry import Box, sample_in_box

CORPUS: list[tuple[str, int]] = [
    ("x1^2", 1),
    ("x1", 1),
    ("-x1", 1),
    ("abs(x1)", 1),
    ("-abs(x1)", 1),
    ("x1^3", 1),
    ("2*x1 + sin(x1)", 1),
    ("sqrt(abs(x1))", 1),
    ("piecewise(x1 <= 0: 0; 1)", 1),
    ("piecewise(x1 < -1: inf; x1 > 1: inf; 1 - x1^2)", 1),
    ("log(x1)", 1),
    ("sqrt(x1)", 1),
    ("1 / x1", 1),
    ("exp(-x1^2)", 1),
    ("cos(x1) * x1 - 0.5", 1),
    ("max(x1, 0)", 1),
    ("min(x1, -x1, 0.25)", 1),
    ("2^x1", 1),
    ("x1^2 + x2^2", 2),
    ("x1^2 - x2^2", 2),
    ("sqrt(x1^2 + x2^2)", 2),
    ("max(abs(x1), abs(x2))", 2),
    ("x1 * x2", 2),
    ("log(x1 + x2)", 2),
    ("piecewise(x1 >= x2: x1 - x2; x2 - x1)", 2),
    ("exp(x1) / (1 + exp(x2))", 2),
    ("1e-3 * x1 + .5 * x2", 2),
    ("x1 + x2 + x3", 3),
    ("min(x1, x2, x3) - max(x1, x2)", 3),
    ("piecewise(x1 + x2 + x3 <= 0: inf; sqrt(x1^2 + x2^2 + x3^2))", 3),
]


def corpus_points(dim: int) -> np.ndarray:
    points = sample_in_box(Box.cube(dim, -3.0, 3.0), 100, seed=42, stream=7)
    # Include exact zeros so the kinks and the domain edges get evaluated too.
    points[:3] = 0.0
    return points


@pytest.mark.parametrize("text, dim", CORPUS)
def test_printed_expression_evaluates_identically(text: str, dim: int):
    expr = parse(text, dim)
    reparsed = parse(format_expr(expr), dim)
    assert reparsed == expr

    points = corpus_points(dim)
    original = evaluate_many(expr, points)
    roundtrip = evaluate_many(reparsed, points)
    assert np.array_equal(np.isinf(original), np.isinf(roundtrip))
    finite = np.isfinite(original)
    assert np.array_equal(original[finite], roundtrip[finite])


@pytest.mark.parametrize("text, dim", CORPUS)
def test_evaluation_is_total(text: str, dim: int):
    values = evaluate_many(parse(text, dim), corpus_points(dim))
    assert not np.any(np.isnan(values))
    assert not np.any(np.isneginf(values))


def test_simple_values():
    assert evaluate(parse("x1^2", 1), [3.0]) == 9.0
    step = parse("piecewise(x1 <= 0: 0; 1)", 1)
    assert evaluate(step, [-1.0]) == 0.0
    assert evaluate(step, [0.0]) == 0.0
    assert evaluate(step, [0.5]) == 1.0
    assert evaluate(parse("max(x1, x2, 0)", 2), [-1.0, -2.0]) == 0.0
    assert evaluate(parse("1e-3*x1", 1), [1000.0]) == 1.0


def test_power_is_right_associative():
    assert evaluate(parse("2^3^2", 1), [0.0]) == 512.0


def test_unary_minus_binds_to_the_atom():
    # unary := "-" atom, so the exponent applies to -x1.
    assert evaluate(parse("-x1^2", 1), [3.0]) == 9.0
    assert evaluate(parse("-(x1^2)", 1), [3.0]) == -9.0


def test_domain_errors_become_infinity():
    assert evaluate(parse("log(x1)", 1), [0.0]) == math.inf
    assert evaluate(parse("log(x1)", 1), [-1.0]) == math.inf
    assert evaluate(parse("sqrt(x1)", 1), [-1.0]) == math.inf
    assert evaluate(parse("1 / x1", 1), [0.0]) == math.inf


def test_nan_and_negative_infinity_are_counted():
    stats = EvalStats()
    assert evaluate(parse("inf - inf", 1), [0.0], stats) == math.inf
    assert stats.nan_converted == 1

    stats = EvalStats()
    assert evaluate(parse("-inf", 1), [0.0], stats) == math.inf
    assert stats.neg_inf_converted == 1
    assert stats.total == 1


def test_format_is_fully_parenthesized():
    assert format_expr(parse("1 + 2 * x1", 1)) == "(1.0 + (2.0 * x1))"
    assert format_expr(parse("-abs(x1)", 1)) == "(-abs(x1))"
    assert str(parse("piecewise(x1 <= 0: 0; 1)", 1)) == "piecewise(x1 <= 0.0: 0.0; 1.0)"


@pytest.mark.parametrize(
    "text, position",
    [
        ("x1 +", 4),
        ("x1 + * 2", 5),
        ("x1 $ 2", 3),
        ("(x1", 3),
        ("", 0),
        ("   ", 0),
        ("x1 x1", 3),
    ],
)
def test_syntax_errors_carry_the_position(text: str, position: int):
    with pytest.raises(ExpressionSyntaxError) as e:
        parse(text, 1)
    assert e.value.position == position


def test_piecewise_needs_a_final_branch():
    with pytest.raises(ExpressionSyntaxError):
        parse("piecewise(x1 <= 0: 0)", 1)
    with pytest.raises(ExpressionSyntaxError):
        parse("piecewise(1)", 1)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("tanh(x1)", 1)


def test_arity():
    with pytest.raises(ArityError):
        parse("abs(x1, x1)", 1)
    with pytest.raises(ArityError):
        parse("min(x1)", 1)


def test_dimension():
    with pytest.raises(DimensionError):
        parse("x3", 2)
    with pytest.raises(DimensionError):
        parse("x0", 2)
    with pytest.raises(DimensionError):
        parse("x1", 0)
    with pytest.raises(DimensionError):
        evaluate(parse("x1 + x2", 2), [1.0])


@given(st.floats(min_value=0.0, max_value=1e15, allow_nan=False, allow_infinity=False))
def test_number_literals_print_exactly(value: float):
    expr = Expr(Num(abs(value)), 1)
    assert parse(format_expr(expr), 1) == expr


@given(
    st.lists(
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False), min_size=2, max_size=2
    )
)
def test_values_are_finite_or_positive_infinity(point: list[float]):
    expr = parse("log(x1) + sqrt(x2) / x1 + piecewise(x2 < 0: -inf; 0)", 2)
    value = evaluate(expr, point)
    assert value == math.inf or math.isfinite(value)
