"""A small arithmetic expression language with exact symbolic derivatives.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' ['-'] integer)?
    atom   := number | 'pi' | ident | func '(' expr ')' | '(' expr ')'

``func`` is one of sin, cos, exp, sqrt, abs. Unary minus binds looser than
``^`` so ``-x^2`` reads as ``-(x^2)``.

Expressions are immutable trees of frozen dataclasses, so ``==`` is
structural equality.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError, NotDifferentiableError, ParseError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Const, Var, Unary, Binary, Pow]


@dataclass(frozen=True)
class Expression:
    root: Node
    variables: tuple[str, ...]

    def __str__(self):
        return to_text(self)

    def __call__(self, point):
        return evaluate(self, point)


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, offset = self.peek()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", offset)
        self.take()

    def parse(self):
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Unary("neg", self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            kind, text, offset = self.peek()
            if kind != "num" or not text.isdigit():
                found = "end of input" if kind == "end" else repr(text)
                raise ParseError(f"integer exponent expected, found {found}", offset)
            self.take()
            return Pow(base, sign * int(text))
        return base

    def atom(self):
        kind, text, offset = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(text, arg)
            if text in self.variables:
                return Var(text)
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            raise UnknownIdentifierError(text, offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", offset)


def parse(text: str, variables: Sequence[str]) -> Expression:
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    variables = tuple(variables)
    if not variables:
        raise ValueError("at least one variable must be declared")
    if len(set(variables)) != len(variables):
        raise ValueError(f"duplicate variable names in {variables}")
    for name in variables:
        if name in FUNCTIONS or name in CONSTANTS or not name.isidentifier():
            raise ValueError(f"invalid variable name {name!r}")
    return Expression(_Parser(text, variables).parse(), variables)


# -- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Const) and node.value < 0:
        return 3
    return 5


def _fmt_const(value):
    return repr(float(value))


def _text(node):
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = _text(node.arg)
            return f"-({inner})" if _prec(node.arg) < 3 else f"-{inner}"
        return f"{node.op}({_text(node.arg)})"
    if isinstance(node, Pow):
        base = _text(node.base)
        if _prec(node.base) < 5:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    p = _PREC[node.op]
    left = _text(node.left)
    right = _text(node.right)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def to_text(e: Expression) -> str:
    """Render an expression so that ``parse`` reproduces the same tree."""
    return _text(e.root)


# -- evaluation ------------------------------------------------------------

_NUMPY_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}


def _build(node, index):
    if isinstance(node, Const):
        v = node.value
        return lambda X: np.full(X.shape[:-1], v)
    if isinstance(node, Var):
        k = index[node.name]
        return lambda X: X[..., k]
    if isinstance(node, Unary):
        g = _build(node.arg, index)
        if node.op == "neg":
            return lambda X: -g(X)
        fn = _NUMPY_FUNCS[node.op]
        return lambda X: fn(g(X))
    if isinstance(node, Pow):
        g = _build(node.base, index)
        n = node.exponent
        if n >= 0:
            return lambda X: g(X) ** n
        return lambda X: 1.0 / g(X) ** (-n)
    a = _build(node.left, index)
    b = _build(node.right, index)
    if node.op == "+":
        return lambda X: a(X) + b(X)
    if node.op == "-":
        return lambda X: a(X) - b(X)
    if node.op == "*":
        return lambda X: a(X) * b(X)
    return lambda X: a(X) / b(X)


def compile_expression(e: Expression) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluator: array of shape (..., n) -> array of shape (...).

    Raises DomainError naming the first point where the result is not finite.
    """
    index = {name: k for k, name in enumerate(e.variables)}
    raw = _build(e.root, index)
    n = len(e.variables)

    def fn(X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1:] != (n,):
            raise ValueError(f"expected points with {n} coordinates, got shape {X.shape}")
        with np.errstate(all="ignore"):
            out = raw(X)
        ok = np.isfinite(out)
        if not ok.all():
            bad = X[~ok][0] if X.ndim > 1 else X
            raise DomainError(f"non-finite value at {tuple(float(v) for v in bad)}", tuple(bad))
        return out

    return fn


def evaluate(e: Expression, point) -> float:
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.size != len(e.variables):
        raise ValueError(f"point has {point.size} coordinates, expression has {len(e.variables)} variables")
    return float(compile_expression(e)(point))


# -- differentiation -------------------------------------------------------

ZERO = Const(0.0)
ONE = Const(1.0)


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Binary("+", a, b)


def _sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    return Binary("-", a, b)


def _mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return Binary("*", a, b)


def _div(a, b):
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Binary("/", a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    return Unary("neg", a)


def _pow(a, n):
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and (a.value != 0 or n > 0):
        return Const(a.value**n)
    return Pow(a, n)


def _d(node, var):
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Unary):
        u = node.arg
        du = _d(u, var)
        if node.op == "neg":
            return _neg(du)
        if node.op == "sin":
            return _mul(Unary("cos", u), du)
        if node.op == "cos":
            return _mul(_neg(Unary("sin", u)), du)
        if node.op == "exp":
            return _mul(node, du)
        if node.op == "sqrt":
            return _div(du, _mul(Const(2.0), node))
        raise NotDifferentiableError(f"cannot differentiate {node.op}(...)")
    if isinstance(node, Pow):
        n = node.exponent
        return _mul(_mul(Const(float(n)), _pow(node.base, n - 1)), _d(node.base, var))
    a, b = node.left, node.right
    da, db = _d(a, var), _d(b, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, 2))


def differentiate(e: Expression, var: str) -> Expression:
    if var not in e.variables:
        raise ValueError(f"{var!r} is not a declared variable")
    return Expression(_d(e.root, var), e.variables)


# -- structural queries ----------------------------------------------------


def free_variables(e: Expression) -> set[str]:
    out = set()

    def walk(node):
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Unary):
            walk(node.arg)
        elif isinstance(node, Pow):
            walk(node.base)
        elif isinstance(node, Binary):
            walk(node.left)
            walk(node.right)

    walk(e.root)
    return out


def _degree(node):
    if isinstance(node, Const):
        return 0
    if isinstance(node, Var):
        return 1
    if isinstance(node, Unary):
        d = _degree(node.arg)
        if node.op == "neg":
            return d
        return 0 if d == 0 else None
    if isinstance(node, Pow):
        d = _degree(node.base)
        if d is None:
            return None
        if node.exponent < 0:
            return 0 if d == 0 else None
        return d * node.exponent
    dl, dr = _degree(node.left), _degree(node.right)
    if dl is None or dr is None:
        return None
    if node.op in "+-":
        return max(dl, dr)
    if node.op == "*":
        return dl + dr
    return dl if dr == 0 else None


def polynomial_degree(e: Expression) -> int | None:
    """Total degree if ``e`` is a polynomial in its variables, else None."""
    return _degree(e.root)
