"""Closed-form scalar expressions for exponent fields and seed functions.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?          # right-associative
    primary := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'

Variables are ``x1..xn`` and ``y1..ym``; functions are ``sin cos exp log
abs sqrt``. Evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

__all__ = [
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError",
    "VariableRangeError", "ExprDomainError",
    "Num", "Var", "Neg", "BinOp", "Call", "Expr",
    "parse_expr", "evaluate", "eval_on_grid", "to_string",
]


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class VariableRangeError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError):
    def __init__(self, message: str, index: int | None = None):
        where = "" if index is None else f" (node {index})"
        super().__init__(message + where)
        self.index = index


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # 'x' or 'y'
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = ("sin", "cos", "exp", "log", "abs", "sqrt")

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_VAR = re.compile(r"([xy])([1-9][0-9]*)\Z")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:

    def __init__(self, text: str, n: int, m: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n
        self.m = m

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "ident":
            self.advance()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            mv = _VAR.match(text)
            if mv is None:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", pos)
            var_kind, index = mv.group(1), int(mv.group(2))
            limit = self.n if var_kind == "x" else self.m
            if index > limit:
                raise VariableRangeError(
                    f"variable {text!r} out of range for n={self.n}, m={self.m}",
                    pos)
            return Var(var_kind, index)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse_expr(text: str, n: int, m: int) -> Expr:
    """Parse ``text`` into an immutable AST over variables x1..xn, y1..ym.

    Raises
    ------
    ExprSyntaxError
        With the byte offset of the offending token. Subclasses flag
        unknown identifiers and out-of-range variable indices.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, n, m).parse()


def _first_bad(mask) -> int | None:
    idx = np.flatnonzero(np.ravel(mask))
    return int(idx[0]) if idx.size else None


def _check(mask, message):
    mask = np.asarray(mask)
    if mask.any():
        raise ExprDomainError(message, _first_bad(mask))


def _log(a):
    _check(a <= 0, "log of a non-positive argument")
    return np.log(a)


def _sqrt(a):
    _check(a < 0, "sqrt of a negative argument")
    return np.sqrt(a)


_FUNC_IMPL: dict[str, Callable] = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp,
    "log": _log, "abs": np.abs, "sqrt": _sqrt,
}


def _power(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    _check((a < 0) & (b != np.round(b)),
           "non-integer power of a negative base")
    _check((a == 0) & (b < 0), "negative power of zero")
    return np.power(a, b)


def _divide(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    _check(b == 0, "division by zero")
    return a / b


def evaluate(e: Expr, env: Mapping[str, np.ndarray | float]):
    """Evaluate ``e`` with variables taken from ``env`` (e.g. ``{'x1': arr}``).

    Arrays broadcast against each other; scalars are allowed.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[f"{e.kind}{e.index}"]
    if isinstance(e, Neg):
        return -np.asarray(evaluate(e.operand, env), dtype=float)
    if isinstance(e, Call):
        return _FUNC_IMPL[e.func](np.asarray(evaluate(e.arg, env), dtype=float))
    a = evaluate(e.left, env)
    b = evaluate(e.right, env)
    if e.op == "+":
        return np.add(a, b)
    if e.op == "-":
        return np.subtract(a, b)
    if e.op == "*":
        return np.multiply(a, b)
    if e.op == "/":
        return _divide(a, b)
    return _power(a, b)


def eval_on_grid(e: Expr, grid) -> np.ndarray:
    """Evaluate ``e`` at every node of ``grid``; returns an array of grid shape.

    Domain errors report the flat (lexicographic) node index.
    """
    env = {name: grid.coords[k] for k, name in enumerate(grid.axis_names)}
    out = np.asarray(evaluate(e, env), dtype=float)
    return np.broadcast_to(out, grid.shape).copy()


def to_string(e: Expr) -> str:
    """Fully parenthesised form; ``parse_expr(to_string(e))`` evaluates like ``e``."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"{e.kind}{e.index}"
    if isinstance(e, Neg):
        return f"(-{to_string(e.operand)})"
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    return f"({to_string(e.left)}{e.op}{to_string(e.right)})"
