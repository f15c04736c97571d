"""A small expression language for extended-real functions of n variables.

Grammar::

    expr      := term (("+"|"-") term)* ;
    term      := factor (("*"|"/") factor)* ;
    factor    := unary ("^" factor)? ;
    unary     := ("-")? atom ;
    atom      := number | "inf" | var | call | "(" expr ")" | piecewise ;
    var       := "x" digits ;
    call      := ident "(" expr ("," expr)* ")" ;
    piecewise := "piecewise" "(" (cond ":" expr ";")+ expr ")" ;
    cond      := expr ("<="|"<"|">="|">") expr ;

Evaluation is vectorized over a batch of points and total: anything outside the natural domain
(log or sqrt of a negative number, division by zero, NaN intermediates, -inf results) evaluates
to +inf, the "outside dom φ" marker.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable, Literal, Union

import numpy as np
import numpy.typing as npt

from .exceptions import ArityError, DimensionError, ExpressionSyntaxError, UnknownIdentifier

Comparison = Literal["<=", "<", ">=", ">"]
BinaryOperator = Literal["+", "-", "*", "/", "^"]


@dataclass(frozen=True)
class Num:
    value: float
    """Always finite and non-negative; a leading minus parses as `Neg`."""


@dataclass(frozen=True)
class Inf:
    pass


@dataclass(frozen=True)
class Var:
    index: int
    """One-based, as written (`x1` is index 1)."""


@dataclass(frozen=True)
class Neg:
    operand: Node


@dataclass(frozen=True)
class BinOp:
    op: BinaryOperator
    left: Node
    right: Node


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Node, ...]


@dataclass(frozen=True)
class Cond:
    op: Comparison
    left: Node
    right: Node


@dataclass(frozen=True)
class Piecewise:
    branches: tuple[tuple[Cond, Node], ...]
    otherwise: Node


Node = Union[Num, Inf, Var, Neg, BinOp, Call, Piecewise]


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with the dimension it was declared for. Immutable, so it can
    be shared between concurrent evaluations."""

    root: Node
    dim: int

    def __str__(self) -> str:
        return format_expr(self)


@dataclass
class EvalStats:
    """Counts the values the evaluator had to push to +inf."""

    nan_converted: int = 0
    neg_inf_converted: int = 0

    def add(self, other: EvalStats) -> None:
        self.nan_converted += other.nan_converted
        self.neg_inf_converted += other.neg_inf_converted

    @property
    def total(self) -> int:
        return self.nan_converted + self.neg_inf_converted


_UNARY: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs": np.abs,
    "sqrt": lambda a: np.where(a < 0, np.inf, np.sqrt(np.abs(a))),
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": lambda a: np.where(a <= 0, np.inf, np.log(np.where(a <= 0, 1.0, a))),
}
_VARIADIC: dict[str, Callable[[Sequence[np.ndarray]], np.ndarray]] = {
    "min": lambda args: np.minimum.reduce(list(args)),
    "max": lambda args: np.maximum.reduce(list(args)),
}
IDENTIFIERS = tuple(_UNARY) + tuple(_VARIADIC)

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|[-+*/^(),:;<>])"
    r")"
)
_VAR_RE = re.compile(r"x(\d+)")
_COMPARISONS = ("<=", "<", ">=", ">")


@dataclass(frozen=True)
class _Token:
    kind: Literal["number", "ident", "op", "end"]
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.lastgroup is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(bad, f"unexpected character {text[bad]!r}")
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))  # type: ignore[arg-type]
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self._tokens = _tokenize(text)
        self._i = 0
        self._dim = dim

    @property
    def _peek(self) -> _Token:
        return self._tokens[self._i]

    def _advance(self) -> _Token:
        token = self._tokens[self._i]
        self._i += 1
        return token

    def _expect(self, text: str) -> _Token:
        token = self._peek
        if token.kind == "end" or token.text != text:
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ExpressionSyntaxError(token.position, f"expected {text!r}, found {found}")
        return self._advance()

    def _at_op(self, *ops: str) -> bool:
        return self._peek.kind == "op" and self._peek.text in ops

    def parse(self) -> Node:
        node = self._expr()
        if self._peek.kind != "end":
            raise ExpressionSyntaxError(
                self._peek.position, f"unexpected {self._peek.text!r} after expression"
            )
        return node

    def _expr(self) -> Node:
        node = self._term()
        while self._at_op("+", "-"):
            op = self._advance().text
            node = BinOp(op, node, self._term())  # type: ignore[arg-type]
        return node

    def _term(self) -> Node:
        node = self._factor()
        while self._at_op("*", "/"):
            op = self._advance().text
            node = BinOp(op, node, self._factor())  # type: ignore[arg-type]
        return node

    def _factor(self) -> Node:
        base = self._unary()
        if self._at_op("^"):
            self._advance()
            return BinOp("^", base, self._factor())
        return base

    def _unary(self) -> Node:
        if self._at_op("-"):
            self._advance()
            return Neg(self._atom())
        return self._atom()

    def _atom(self) -> Node:
        token = self._peek
        if token.kind == "number":
            self._advance()
            return Num(float(token.text))
        if token.kind == "op" and token.text == "(":
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        if token.kind == "ident":
            return self._identifier()
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExpressionSyntaxError(token.position, f"expected an operand, found {found}")

    def _identifier(self) -> Node:
        token = self._advance()
        name = token.text
        if name == "inf":
            return Inf()
        if name == "piecewise":
            return self._piecewise(token)
        var = _VAR_RE.fullmatch(name)
        if var is not None:
            index = int(var.group(1))
            if index < 1 or index > self._dim:
                raise DimensionError(
                    f"variable {name} at position {token.position} is outside dimension "
                    f"{self._dim}"
                )
            return Var(index)
        if name not in IDENTIFIERS:
            raise UnknownIdentifier(f"unknown identifier {name!r} at position {token.position}")
        self._expect("(")
        args = [self._expr()]
        while self._at_op(","):
            self._advance()
            args.append(self._expr())
        self._expect(")")
        if name in _UNARY and len(args) != 1:
            raise ArityError(f"{name} takes 1 argument, got {len(args)}")
        if name in _VARIADIC and len(args) < 2:
            raise ArityError(f"{name} takes at least 2 arguments, got {len(args)}")
        return Call(name, tuple(args))

    def _piecewise(self, head: _Token) -> Node:
        self._expect("(")
        branches: list[tuple[Cond, Node]] = []
        while True:
            left = self._expr()
            if self._at_op(*_COMPARISONS):
                op = self._advance().text
                cond = Cond(op, left, self._expr())  # type: ignore[arg-type]
                self._expect(":")
                value = self._expr()
                if self._at_op(")"):
                    raise ExpressionSyntaxError(
                        self._peek.position, "piecewise needs a final unconditional branch"
                    )
                self._expect(";")
                branches.append((cond, value))
                continue
            if not branches:
                raise ExpressionSyntaxError(
                    head.position, "piecewise needs at least one conditional branch"
                )
            self._expect(")")
            return Piecewise(tuple(branches), left)


def parse(text: str, dim: int) -> Expr:
    """Parse `text` into an expression over variables x1..x{dim}.

    Raises:
        ExpressionSyntaxError: malformed input, with the offending character offset.
        UnknownIdentifier: a call to something other than the built-ins.
        ArityError: a built-in called with the wrong number of arguments.
        DimensionError: a variable index outside 1..dim.
    """
    if dim < 1:
        raise DimensionError(f"dimension must be positive, got {dim}")
    if not text or not text.strip():
        raise ExpressionSyntaxError(0, "empty expression")
    return Expr(_Parser(text, dim).parse(), dim)


def _format(node: Node) -> str:
    # Every output is an atom of the grammar, so nesting never needs precedence reasoning.
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Inf):
        return "inf"
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{_format(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_format(node.left)} {node.op} {_format(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_format(a) for a in node.args)})"
    parts = [
        f"{_format(c.left)} {c.op} {_format(c.right)}: {_format(value)}; "
        for c, value in node.branches
    ]
    return f"piecewise({''.join(parts)}{_format(node.otherwise)})"


def format_expr(expr: Expr) -> str:
    """Canonical, fully parenthesized text. `parse(format_expr(e), e.dim)` rebuilds an identical
    tree, so it evaluates identically everywhere."""
    return _format(expr.root)


def _sanitize(values: np.ndarray, stats: EvalStats) -> np.ndarray:
    nans = np.isnan(values)
    if nans.any():
        stats.nan_converted += int(nans.sum())
        values = np.where(nans, np.inf, values)
    return values


def _eval(node: Node, points: np.ndarray, stats: EvalStats) -> np.ndarray:
    m = points.shape[0]
    if isinstance(node, Num):
        return np.full(m, node.value)
    if isinstance(node, Inf):
        return np.full(m, np.inf)
    if isinstance(node, Var):
        return points[:, node.index - 1].astype(float)
    if isinstance(node, Neg):
        return -_eval(node.operand, points, stats)
    if isinstance(node, BinOp):
        left = _eval(node.left, points, stats)
        right = _eval(node.right, points, stats)
        if node.op == "+":
            out = left + right
        elif node.op == "-":
            out = left - right
        elif node.op == "*":
            out = left * right
        elif node.op == "/":
            zero = right == 0
            out = np.where(zero, np.inf, left / np.where(zero, 1.0, right))
        else:
            out = np.power(left, right)
        return _sanitize(out, stats)
    if isinstance(node, Call):
        args = [_eval(a, points, stats) for a in node.args]
        if node.name in _UNARY:
            return _sanitize(_UNARY[node.name](args[0]), stats)
        return _sanitize(_VARIADIC[node.name](args), stats)
    result = _eval(node.otherwise, points, stats)
    for cond, value in reversed(node.branches):
        left = _eval(cond.left, points, stats)
        right = _eval(cond.right, points, stats)
        if cond.op == "<=":
            mask = left <= right
        elif cond.op == "<":
            mask = left < right
        elif cond.op == ">=":
            mask = left >= right
        else:
            mask = left > right
        result = np.where(mask, _eval(value, points, stats), result)
    return result


def evaluate_many(
    expr: Expr, points: npt.ArrayLike, stats: EvalStats | None = None
) -> npt.NDArray[np.float64]:
    """Evaluate at each row of `points` (shape (m, dim)). Never raises on finite input; values
    outside the domain come back as +inf and are counted in `stats`."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != expr.dim:
        raise DimensionError(f"expected points of dimension {expr.dim}, got shape {pts.shape}")
    local = stats if stats is not None else EvalStats()
    with np.errstate(all="ignore"):
        values = _sanitize(_eval(expr.root, pts, local), local)
    neg_inf = np.isneginf(values)
    if neg_inf.any():
        local.neg_inf_converted += int(neg_inf.sum())
        values = np.where(neg_inf, np.inf, values)
    return values


def evaluate(expr: Expr, x: npt.ArrayLike, stats: EvalStats | None = None) -> float:
    """Evaluate at a single point; returns a float that is finite or +inf."""
    point = np.asarray(x, dtype=float).ravel()
    if point.shape[0] != expr.dim:
        raise DimensionError(f"expected a point of dimension {expr.dim}, got {point.shape[0]}")
    return float(evaluate_many(expr, point.reshape(1, -1), stats)[0])
