"""A small expression language for real functions of one variable ``t``.

Grammar (whitespace insignificant)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | '+' unary | power
    power    := base ('^' unary)?              # right associative
    base     := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
              | 'piecewise' '(' cond ',' expr ',' expr ')'
    cond     := 't' ('>=' | '<=') signed_number
    func     := exp | sin | cos | sqrt | abs | neg | sign

``piecewise(t>=c, x, y)`` is ``x`` where the guard holds and ``y`` elsewhere.
Each branch is only evaluated where it is selected, so a guarded branch may
be singular on the other side of the guard.

Evaluation is vectorized over numpy arrays of ``t``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ExprSyntaxError, UnknownIdentifier

FUNCS = ("exp", "sin", "cos", "sqrt", "abs", "neg", "sign")
CONSTANTS = {"pi": math.pi}


# -- AST -----------------------------------------------------------------------

class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    pass


@dataclass(frozen=True)
class Unary(Node):
    op: str
    arg: Node


@dataclass(frozen=True)
class Binary(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Piecewise(Node):
    """``then`` where ``t <op> threshold`` holds, ``other`` elsewhere."""

    op: str  # '>=' or '<='
    threshold: float
    then: Node
    other: Node

    def mask(self, t):
        return t >= self.threshold if self.op == ">=" else t <= self.threshold


# -- tokenizer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>>=|<=|[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 encoding of the source


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos), source)
        if m.lastgroup != "ws":
            tokens.append(_Tok(m.lastgroup, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(_Tok("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source, index):
    return len(source[:index].encode("utf-8"))


# -- parser ------------------------------------------------------------------------

class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ExprSyntaxError(message, tok.offset, self.source)

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text):
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.base()
        if self.tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def base(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name == "t":
                return Var()
            if name in CONSTANTS:
                return Num(CONSTANTS[name])
            if name == "piecewise":
                return self.piecewise()
            if name in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            raise UnknownIdentifier(f"unknown identifier {name!r}", tok.offset, self.source)
        found = tok.text or "end of input"
        raise self.error(f"expected a number, 't', a function or '(', found {found!r}")

    def piecewise(self):
        self.expect("(")
        if self.tok.text != "t":
            raise self.error("piecewise condition must start with 't'")
        self.advance()
        if self.tok.text not in (">=", "<="):
            raise self.error("expected '>=' or '<=' in piecewise condition")
        op = self.advance().text
        sign = 1.0
        while self.tok.text in ("-", "+"):
            if self.advance().text == "-":
                sign = -sign
        if self.tok.kind != "num":
            raise self.error("piecewise threshold must be a number")
        threshold = sign * float(self.advance().text)
        self.expect(",")
        then = self.expr()
        self.expect(",")
        other = self.expr()
        self.expect(")")
        return Piecewise(op, threshold, then, other)


def parse_expr(source: str) -> Node:
    """Parse ``source`` into an AST.

    Raises
    ------
    ExprSyntaxError
        With the byte offset of the offending token.
    UnknownIdentifier
        For names that are neither ``t``, a constant nor a known function.
    """
    if not isinstance(source, str):
        raise ExprSyntaxError("expression must be a string", 0)
    return _Parser(source).parse()


# -- printing ---------------------------------------------------------------------

def _num_text(value):
    text = repr(float(value))
    if value < 0:
        return f"neg({text[1:]})"
    return text


def to_source(node: Node) -> str:
    """Fully parenthesized source text; re-parses to a structurally equal AST."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Unary):
        return f"{node.op}({to_source(node.arg)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Piecewise):
        return (
            f"piecewise(t{node.op}{node.threshold!r}, "
            f"{to_source(node.then)}, {to_source(node.other)})"
        )
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation --------------------------------------------------------------------

def _check(ok, message):
    if not bool(np.all(ok)):
        raise EvalError(message)


def _eval(node, t):
    if isinstance(node, Num):
        return np.full(t.shape, node.value)
    if isinstance(node, Var):
        return t.astype(float, copy=True)
    if isinstance(node, Unary):
        x = _eval(node.arg, t)
        op = node.op
        if op == "neg":
            return -x
        if op == "abs":
            return np.abs(x)
        if op == "sign":
            return np.sign(x)
        if op == "exp":
            return np.exp(x)
        if op == "sin":
            _check(np.isfinite(x), "sin of a non-finite value")
            return np.sin(x)
        if op == "cos":
            _check(np.isfinite(x), "cos of a non-finite value")
            return np.cos(x)
        if op == "sqrt":
            _check(~(x < 0), "sqrt of a negative value")
            return np.sqrt(x)
        raise EvalError(f"unknown function {op!r}")
    if isinstance(node, Binary):
        left = _eval(node.left, t)
        right = _eval(node.right, t)
        op = node.op
        if op == "+":
            out = left + right
        elif op == "-":
            out = left - right
        elif op == "*":
            out = left * right
        elif op == "/":
            _check(right != 0, "division by zero")
            out = left / right
        elif op == "^":
            _check(~((left == 0) & (right < 0)), "division by zero in power")
            out = np.power(left, right)
        else:
            raise EvalError(f"unknown operator {op!r}")
        _check(~np.isnan(out) | np.isnan(left) | np.isnan(right), f"invalid operands for {op!r}")
        return out
    if isinstance(node, Piecewise):
        mask = node.mask(t)
        out = np.empty(t.shape)
        if mask.any():
            out[mask] = _eval(node.then, t[mask])
        if (~mask).any():
            out[~mask] = _eval(node.other, t[~mask])
        return out
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Node, t):
    """Evaluate ``node`` at scalar or array ``t``; raises EvalError on domain errors."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    with np.errstate(all="ignore"):
        out = _eval(node, np.atleast_1d(arr))
    _check(np.isfinite(out), "expression evaluated to a non-finite value")
    return float(out[0]) if scalar else out


# -- symbolic derivative -------------------------------------------------------------

class NotDifferentiable(Exception):
    pass


def _is_const(node):
    if isinstance(node, Num):
        return True
    if isinstance(node, Var):
        return False
    if isinstance(node, Unary):
        return _is_const(node.arg)
    if isinstance(node, Binary):
        return _is_const(node.left) and _is_const(node.right)
    return False


def _zero(node):
    return isinstance(node, Num) and node.value == 0.0


def _one(node):
    return isinstance(node, Num) and node.value == 1.0


def _add(a, b):
    if _zero(a):
        return b
    if _zero(b):
        return a
    return Binary("+", a, b)


def _sub(a, b):
    if _zero(b):
        return a
    if _zero(a):
        return Unary("neg", b)
    return Binary("-", a, b)


def _mul(a, b):
    if _zero(a) or _zero(b):
        return Num(0.0)
    if _one(a):
        return b
    if _one(b):
        return a
    return Binary("*", a, b)


def _div(a, b):
    if _zero(a):
        return Num(0.0)
    return Binary("/", a, b)


def differentiate(node: Node) -> Node:
    """d/dt of ``node``.

    ``abs`` differentiates to ``sign`` and ``sign`` to 0, so derivatives are
    one-sided at kinks. Powers with a ``t``-dependent exponent raise
    NotDifferentiable.
    """
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0)
    if isinstance(node, Unary):
        u, du = node.arg, differentiate(node.arg)
        op = node.op
        if op == "neg":
            return Unary("neg", du) if not _zero(du) else Num(0.0)
        if op == "exp":
            return _mul(node, du)
        if op == "sin":
            return _mul(Unary("cos", u), du)
        if op == "cos":
            return _mul(Unary("neg", Unary("sin", u)), du)
        if op == "sqrt":
            return _div(du, _mul(Num(2.0), node))
        if op == "abs":
            return _mul(Unary("sign", u), du)
        if op == "sign":
            return Num(0.0)
        raise NotDifferentiable(op)
    if isinstance(node, Binary):
        u, v = node.left, node.right
        op = node.op
        if op == "+":
            return _add(differentiate(u), differentiate(v))
        if op == "-":
            return _sub(differentiate(u), differentiate(v))
        if op == "*":
            return _add(_mul(differentiate(u), v), _mul(u, differentiate(v)))
        if op == "/":
            num = _sub(_mul(differentiate(u), v), _mul(u, differentiate(v)))
            return _div(num, Binary("^", v, Num(2.0)))
        if op == "^":
            if not _is_const(v):
                raise NotDifferentiable("power with a t-dependent exponent")
            du = differentiate(u)
            if _zero(du):
                return Num(0.0)
            if isinstance(v, Num):
                reduced = Num(v.value - 1.0)
            else:
                reduced = Binary("-", v, Num(1.0))
            power = u if (isinstance(reduced, Num) and reduced.value == 1.0) else Binary("^", u, reduced)
            return _mul(_mul(v, power), du)
        raise NotDifferentiable(op)
    if isinstance(node, Piecewise):
        return Piecewise(node.op, node.threshold, differentiate(node.then), differentiate(node.other))
    raise TypeError(f"not an expression node: {node!r}")


def breakpoints(node: Node) -> list[float]:
    """Sorted guard thresholds appearing anywhere in ``node``."""
    found = set()

    def walk(n):
        if isinstance(n, Piecewise):
            found.add(n.threshold)
            walk(n.then)
            walk(n.other)
        elif isinstance(n, Unary):
            walk(n.arg)
        elif isinstance(n, Binary):
            walk(n.left)
            walk(n.right)

    walk(node)
    return sorted(found)
