"""Coordinate-expression language for metric components and test functions.

Grammar (standard precedence, left-associative binary operators)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?
    exponent:= ['-'] INTEGER | '(' ['-'] INTEGER ')'
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``-x^2`` therefore parses as ``-(x^2)``. Exponents are integer literals with
``|k| <= 16``; negative powers are evaluated as reciprocals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .jets import ELEMENTARY, Jet, JetError

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
MAX_EXPONENT = 16
MAX_ORDER = 4


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownSymbolError(ExprError):
    def __init__(self, symbol: str, offset: int):
        super().__init__(f"unknown symbol {symbol!r} at byte offset {offset}")
        self.symbol = symbol
        self.offset = offset


class EvaluationError(ExprError):
    """Domain error during evaluation; ``subexpr`` is the offending node."""

    def __init__(self, message: str, subexpr: "Node"):
        super().__init__(f"{message} in {pretty(subexpr)}")
        self.subexpr = subexpr


# AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    name: str
    index: int


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Coord, Param, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with the symbols it was declared over."""

    root: Node
    coords: tuple
    params: tuple

    def __str__(self) -> str:
        return pretty(self.root)

    @property
    def depth(self) -> int:
        return depth(self.root)

    def symbols(self) -> set:
        return _symbols(self.root)


def depth(node: Node) -> int:
    """Edges on the longest root-to-leaf path (a bare literal has depth 0)."""
    if isinstance(node, (Num, Coord, Param)):
        return 0
    if isinstance(node, BinOp):
        return 1 + max(depth(node.left), depth(node.right))
    if isinstance(node, Neg):
        return 1 + depth(node.operand)
    if isinstance(node, Pow):
        return 1 + depth(node.base)
    return 1 + depth(node.arg)


def _symbols(node: Node) -> set:
    if isinstance(node, (Coord, Param)):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, BinOp):
        return _symbols(node.left) | _symbols(node.right)
    if isinstance(node, Neg):
        return _symbols(node.operand)
    if isinstance(node, Pow):
        return _symbols(node.base)
    return _symbols(node.arg)


def pretty(node: Node) -> str:
    """Fully parenthesised text that re-parses to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Coord, Param)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{pretty(node.operand)})"
    if isinstance(node, BinOp):
        return f"({pretty(node.left)} {node.op} {pretty(node.right)})"
    if isinstance(node, Pow):
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"({pretty(node.base)}^{exp})"
    return f"{node.func}({pretty(node.arg)})"


# parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    raw = text.encode()
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            off = len(text[:pos].encode()) + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}", off)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text, coords, params):
        self.tokens = _tokenize(text)
        self.i = 0
        self.coords = {name: k for k, name in enumerate(coords)}
        self.params = set(params)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, off = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = self.peek()[:2] == ("op", "(")
        if paren:
            self.take()
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1
        kind, text, off = self.take()
        if kind != "num" or not re.fullmatch(r"\d+", text):
            raise ExprSyntaxError("exponent must be an integer literal", off)
        k = sign * int(text)
        if abs(k) > MAX_EXPONENT:
            raise ExprSyntaxError(f"exponent {k} outside [-{MAX_EXPONENT}, {MAX_EXPONENT}]", off)
        if paren:
            self.expect(")")
        return k

    def atom(self) -> Node:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS and self.peek()[:2] == ("op", "("):
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in self.coords:
                return Coord(text, self.coords[text])
            if text in self.params:
                return Param(text)
            raise UnknownSymbolError(text, off)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", off)


def parse_expr(text: str, coords: Sequence[str], params: Sequence[str] = ()) -> Expr:
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    names = list(coords) + list(params)
    if len(set(names)) != len(names):
        raise ExprError("coordinate and parameter names must be distinct")
    for name in names:
        if name in FUNCTIONS:
            raise ExprError(f"{name!r} is reserved for a function")
    root = _Parser(text, coords, params).parse()
    return Expr(root, tuple(coords), tuple(params))


# evaluation --------------------------------------------------------------


def eval_jet(e: Expr, point, param_values: Mapping[str, float], order: int) -> Jet:
    """Taylor jet of ``e`` about ``point`` through total degree ``order``.

    ``point`` may be a single coordinate vector of shape ``(n,)`` or a batch
    of shape ``(..., n)``; the jet then carries the same leading shape.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ExprError(f"order must lie in 0..{MAX_ORDER}")
    point = np.asarray(point, dtype=float)
    n = len(e.coords)
    if point.shape[-1:] != (n,):
        raise ExprError(f"point has dimension {point.shape[-1:]}, expression has {n} coordinates")
    missing = [p for p in e.params if p not in param_values]
    if missing:
        raise ExprError(f"unbound parameters: {', '.join(missing)}")
    batch = point.shape[:-1]
    cache: dict = {}

    def ev(node: Node) -> Jet:
        hit = cache.get(node)
        if hit is not None:
            return hit
        out = _eval(node)
        cache[node] = out
        return out

    def _eval(node: Node) -> Jet:
        if isinstance(node, Num):
            return Jet.constant(np.full(batch, node.value), n, order)
        if isinstance(node, Coord):
            return Jet.variable(node.index, point[..., node.index], n, order)
        if isinstance(node, Param):
            return Jet.constant(np.full(batch, float(param_values[node.name])), n, order)
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if np.any(b.value == 0):
                raise EvaluationError("division by zero", node.right)
            return a / b
        if isinstance(node, Pow):
            a = ev(node.base)
            if node.exponent < 0 and np.any(a.value == 0):
                raise EvaluationError("division by zero", node)
            return a ** node.exponent
        a = ev(node.arg)
        if node.func == "sqrt" and np.any(a.value <= 0):
            if np.any(a.value < 0):
                raise EvaluationError("sqrt of a negative value", node)
            raise EvaluationError("sqrt at zero is not differentiable", node)
        try:
            return ELEMENTARY[node.func](a)
        except JetError as exc:  # pragma: no cover - guarded above
            raise EvaluationError(str(exc), node) from exc

    return ev(e.root)


def eval_value(e: Expr, point, param_values: Mapping[str, float]) -> np.ndarray:
    return eval_jet(e, point, param_values, 0).value
