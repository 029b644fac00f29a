"""Tiny expression trees evaluated in interval arithmetic.

Expressions are built with ordinary Python operators::

    >>> from o2est.expr import PI, sqrt, eval_interval
    >>> e = PI * sqrt(3) / 4
    >>> float(eval_interval(e))
    1.3603495231756633
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import InputError
from .interval import DIGITS, Interval, pi_interval


class Expr:
    def __add__(self, o):
        return Node("add", (self, lift(o)))

    def __radd__(self, o):
        return Node("add", (lift(o), self))

    def __sub__(self, o):
        return Node("sub", (self, lift(o)))

    def __rsub__(self, o):
        return Node("sub", (lift(o), self))

    def __mul__(self, o):
        return Node("mul", (self, lift(o)))

    def __rmul__(self, o):
        return Node("mul", (lift(o), self))

    def __truediv__(self, o):
        return Node("div", (self, lift(o)))

    def __rtruediv__(self, o):
        return Node("div", (lift(o), self))

    def __neg__(self):
        return Node("neg", (self,))

    def __pow__(self, e):
        return Node("pow", (self,), Fraction(e))

    def free_symbols(self) -> set[str]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Interval

    def free_symbols(self) -> set[str]:
        return set()

    def __repr__(self) -> str:
        v = self.value
        return str(v.lo) if v.is_exact() else repr(v)


@dataclass(frozen=True, eq=False)
class Sym(Expr):
    name: str

    def free_symbols(self) -> set[str]:
        return {self.name}

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class PiConst(Expr):
    def free_symbols(self) -> set[str]:
        return set()

    def __repr__(self) -> str:
        return "pi"


@dataclass(frozen=True, eq=False)
class Node(Expr):
    op: str
    args: tuple
    param: Fraction | None = None

    def free_symbols(self) -> set[str]:
        out: set[str] = set()
        for a in self.args:
            out |= a.free_symbols()
        return out

    def __repr__(self) -> str:
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
        if self.op in sym:
            return f"({self.args[0]!r} {sym[self.op]} {self.args[1]!r})"
        if self.op == "neg":
            return f"-{self.args[0]!r}"
        if self.op == "pow":
            return f"({self.args[0]!r})^({self.param})"
        return f"{self.op}({', '.join(map(repr, self.args))})"


def lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Interval):
        return Const(x)
    if isinstance(x, (int, Fraction, str)):
        return Const(Interval.point(Fraction(x)))
    raise InputError(f"cannot lift {x!r} into an expression (floats are not allowed)")


def const(x) -> Expr:
    return lift(x)


def sym(name: str) -> Sym:
    return Sym(name)


def sqrt(x) -> Expr:
    return Node("pow", (lift(x),), Fraction(1, 2))


PI = PiConst()


def eval_interval(
    expr: Expr,
    bindings: Mapping[str, object] | None = None,
    *,
    pi: Interval | None = None,
    digits: int = DIGITS,
) -> Interval:
    """Evaluate ``expr`` to an enclosing interval.

    Free symbols must be bound to rationals or intervals.  ``pi`` selects
    the enclosure used for the constant (defaults to the 30-digit Machin
    enclosure).
    """
    bindings = dict(bindings or {})
    missing = expr.free_symbols() - set(bindings)
    if missing:
        raise InputError(f"unbound symbols: {sorted(missing)}")
    pi_val = pi if pi is not None else pi_interval(digits)

    def ev(e: Expr) -> Interval:
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Sym):
            return Interval.coerce(bindings[e.name])
        if isinstance(e, PiConst):
            return pi_val
        if isinstance(e, Node):
            a = [ev(x) for x in e.args]
            if e.op == "add":
                return a[0] + a[1]
            if e.op == "sub":
                return a[0] - a[1]
            if e.op == "mul":
                return a[0] * a[1]
            if e.op == "div":
                return a[0] / a[1]
            if e.op == "neg":
                return -a[0]
            if e.op == "pow":
                p = e.param
                if p.denominator == 1:
                    return a[0] ** int(p)
                if p == Fraction(1, 2) and a[0].lo >= 0:
                    return a[0].sqrt(digits)
                return a[0].rpow(p, digits)
        raise InputError(f"unknown expression node {e!r}")

    return ev(expr)
