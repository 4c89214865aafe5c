"""Integrand and density expressions.

A small recursive-descent parser for arithmetic over the domain
coordinates, plus a vectorized evaluator. Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | CONST | VAR | FUNC '(' expr ')' | '(' expr ')'

Variables are ``t`` (alias of the first coordinate) and ``x1`` .. ``x9``.
Constants are ``pi`` and ``e``. ``-2^2`` parses as ``-(2^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalError, ParseError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "step")
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str

    @property
    def index(self) -> int:
        """1-based coordinate index."""
        return 1 if self.name == "t" else int(self.name[1:])


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


Expr = Union[Num, Const, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)
_VAR = re.compile(r"t|x[1-9]")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        # keep the offset inside the input even for end-of-input errors
        pos = min(tok[2], max(len(self.src) - 1, 0))
        raise ParseError(message, pos, self.src)

    def expect(self, text: str):
        tok = self.peek()
        if tok[1] != text or tok[0] == "end":
            self.error(f"expected {text!r}")
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected trailing token {self.peek()[1]!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.peek()
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
            if text in CONSTANTS:
                return Const(text)
            if _VAR.fullmatch(text):
                return Var(text)
            self.error(f"unknown identifier {text!r}", (kind, text, pos))
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected token {text!r}")


def parse(src: str) -> Expr:
    """Parse ``src`` into an immutable AST, raising :class:`ParseError`."""
    return _Parser(src).parse()


def to_source(node: Expr) -> str:
    """Fully parenthesized text that parses back to an equal AST."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def max_var_index(node: Expr) -> int:
    """Largest coordinate index referenced (0 for constant expressions)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Neg):
        return max_var_index(node.operand)
    if isinstance(node, BinOp):
        return max(max_var_index(node.left), max_var_index(node.right))
    if isinstance(node, Call):
        return max_var_index(node.arg)
    return 0


def _fail(message: str, bad: np.ndarray, points: np.ndarray):
    first = int(np.flatnonzero(bad)[0])
    raise EvalError(message, points[first])


def _eval(node: Expr, points: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(points.shape[0], node.value)
    if isinstance(node, Const):
        return np.full(points.shape[0], CONSTANTS[node.name])
    if isinstance(node, Var):
        idx = node.index
        if idx > points.shape[1]:
            raise EvalError(f"variable {node.name} exceeds domain dimension {points.shape[1]}")
        return points[:, idx - 1].astype(float, copy=True)
    if isinstance(node, Neg):
        return -_eval(node.operand, points)
    if isinstance(node, BinOp):
        a = _eval(node.left, points)
        b = _eval(node.right, points)
        op = node.op
        if op == "+":
            out = a + b
        elif op == "-":
            out = a - b
        elif op == "*":
            out = a * b
        elif op == "/":
            bad = b == 0
            if bad.any():
                _fail("division by zero", bad, points)
            out = a / b
        else:
            bad = ((a < 0) & (b != np.round(b))) | ((a == 0) & (b < 0))
            if bad.any():
                _fail("power with negative base and non-integer exponent, or 0 to a negative power",
                      bad, points)
            out = np.power(a, b)
    elif isinstance(node, Call):
        a = _eval(node.arg, points)
        f = node.func
        if f == "log":
            bad = a <= 0
            if bad.any():
                _fail("log of nonpositive value", bad, points)
            out = np.log(a)
        elif f == "sqrt":
            bad = a < 0
            if bad.any():
                _fail("sqrt of negative value", bad, points)
            out = np.sqrt(a)
        elif f == "step":
            out = np.where(a >= 0, 1.0, 0.0)
        elif f == "abs":
            out = np.abs(a)
        else:
            out = getattr(np, f)(a)
    else:
        raise TypeError(f"not an expression node: {node!r}")
    bad = ~np.isfinite(out)
    if bad.any():
        _fail(f"non-finite result in {to_source(node)}", bad, points)
    return out


def evaluate_many(node: Expr, points) -> np.ndarray:
    """Evaluate at each row of ``points`` (shape (k, d)); returns shape (k,).

    Any domain error or non-finite intermediate raises :class:`EvalError`
    naming the first offending point.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    with np.errstate(all="ignore"):
        return _eval(node, pts)


def evaluate(node: Expr, point) -> float:
    """Evaluate at a single point (a scalar or a coordinate sequence)."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    return float(evaluate_many(node, pt[None, :])[0])


def evaluate_system(fns, points) -> np.ndarray:
    """Stack of images X(t) for every row of ``points``: shape (k, n)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return np.column_stack([evaluate_many(f, pts) for f in fns]) if fns else np.empty((len(pts), 0))
