"""Intervals with exact rational endpoints.

Addition, subtraction, multiplication and division are exact on
:class:`fractions.Fraction` endpoints, so no rounding is needed there.  Only
roots and transcendental constants introduce enclosures: square and k-th
roots of rationals are exact when the rational is a perfect power and are
otherwise bracketed with integer Newton roots at a configurable number of
decimal digits (30 by default), rounded outward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import InputError

Number = Union[int, Fraction, "Interval"]

DIGITS = 30


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise InputError(f"cannot convert {x!r} to an exact rational")


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer (integer Newton)."""
    if n < 0:
        raise InputError("iroot of a negative integer")
    if n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _exact_root(r: Fraction, k: int) -> Fraction | None:
    a, b = r.numerator, r.denominator
    ra, rb = iroot(a, k), iroot(b, k)
    if ra**k == a and rb**k == b:
        return Fraction(ra, rb)
    return None


def root_bounds(r: Fraction, k: int, digits: int = DIGITS) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= r**(1/k) <= hi`` with ``hi - lo <= 10**-digits``."""
    r = _frac(r)
    if r < 0:
        raise InputError("root of a negative rational")
    exact = _exact_root(r, k)
    if exact is not None:
        return exact, exact
    scale = 10**digits
    # floor(r * scale^k) then its integer k-th root, so lo**k <= r
    big = (r.numerator * scale**k) // r.denominator
    lo_int = iroot(big, k)
    lo = Fraction(lo_int, scale)
    hi = Fraction(lo_int + 1, scale)
    return lo, hi


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", _frac(self.lo))
        object.__setattr__(self, "hi", _frac(self.hi))
        if self.lo > self.hi:
            raise InputError(f"empty interval [{self.lo}, {self.hi}]")

    # construction -----------------------------------------------------
    @classmethod
    def point(cls, x) -> "Interval":
        f = _frac(x)
        return cls(f, f)

    @classmethod
    def coerce(cls, x) -> "Interval":
        if isinstance(x, Interval):
            return x
        return cls.point(x)

    # queries ----------------------------------------------------------
    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        f = _frac(x)
        return self.lo <= f <= self.hi

    def certainly_le(self, other) -> bool:
        return self.hi <= Interval.coerce(other).lo

    def certainly_lt(self, other) -> bool:
        return self.hi < Interval.coerce(other).lo

    def certainly_positive(self) -> bool:
        return self.lo > 0

    def __float__(self) -> float:
        return float(self.mid)

    def as_tuple(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def __repr__(self) -> str:
        if self.is_exact():
            return f"Interval({self.lo})"
        return f"Interval([{float(self.lo):.17g}, {float(self.hi):.17g}])"

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = Interval.coerce(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = Interval.coerce(other)
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return Interval.coerce(other) - self

    def __mul__(self, other):
        o = Interval.coerce(other)
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(c), max(c))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"division by an interval containing 0: {self!r}")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * Interval.coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return Interval.coerce(other) * self.reciprocal()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise InputError("use rpow for non-integer exponents")
        if k == 0:
            return Interval.point(1)
        if k < 0:
            return (self ** (-k)).reciprocal()
        if k % 2 == 1 or self.lo >= 0:
            a, b = self.lo**k, self.hi**k
            return Interval(min(a, b), max(a, b))
        if self.hi <= 0:
            return Interval(self.hi**k, self.lo**k)
        return Interval(Fraction(0), max(self.lo**k, self.hi**k))

    def root(self, k: int, digits: int = DIGITS) -> "Interval":
        if self.lo < 0:
            raise InputError(f"even root of an interval reaching below zero: {self!r}")
        lo, _ = root_bounds(self.lo, k, digits)
        _, hi = root_bounds(self.hi, k, digits)
        return Interval(lo, hi)

    def sqrt(self, digits: int = DIGITS) -> "Interval":
        return self.root(2, digits)

    def rpow(self, e, digits: int = DIGITS) -> "Interval":
        """``self ** e`` for rational ``e`` and a positive interval."""
        e = _frac(e)
        if self.lo <= 0:
            raise InputError("rational power needs a strictly positive base")
        p, q = e.numerator, e.denominator
        base = Interval(self.lo ** abs(p), self.hi ** abs(p))
        out = base.root(q, digits) if q != 1 else base
        return out.reciprocal() if p < 0 else out

    def hull(self, other) -> "Interval":
        o = Interval.coerce(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def intersect(self, other) -> "Interval":
        o = Interval.coerce(other)
        return Interval(max(self.lo, o.lo), min(self.hi, o.hi))


def isqrt_interval(x, digits: int = DIGITS) -> Interval:
    return Interval.coerce(x).sqrt(digits)


# ---------------------------------------------------------------------------
# pi
# ---------------------------------------------------------------------------


def _arctan_inv_bounds(k: int, digits: int) -> tuple[Fraction, Fraction]:
    """Bracket ``arctan(1/k)`` using consecutive partial sums of the alternating series."""
    x = Fraction(1, k)
    tol = Fraction(1, 10 ** (digits + 2))
    s = Fraction(0)
    term = x
    n = 0
    while True:
        new = s + (term if n % 2 == 0 else -term) / (2 * n + 1)
        nxt = x ** (2 * n + 3) / (2 * n + 3)
        if nxt < tol:
            lo, hi = sorted((new, new + (nxt if n % 2 == 1 else -nxt)))
            return lo, hi
        s = new
        term = term * x * x
        n += 1


@lru_cache(maxsize=8)
def pi_interval(digits: int = DIGITS) -> Interval:
    """Certified enclosure of pi from Machin's formula."""
    a_lo, a_hi = _arctan_inv_bounds(5, digits)
    b_lo, b_hi = _arctan_inv_bounds(239, digits)
    return Interval(16 * a_lo - 4 * b_hi, 16 * a_hi - 4 * b_lo)


PI_COARSE = Interval(Fraction(355, 113) - Fraction(1, 10**6), Fraction(355, 113))


def sqrt_const(k: int, digits: int = DIGITS) -> Interval:
    return Interval.point(k).sqrt(digits)


# ---------------------------------------------------------------------------
# sine on small rational intervals (used for the chord/arc comparison)
# ---------------------------------------------------------------------------


def sin_interval(x: Interval, terms: int = 40) -> Interval:
    """Enclosure of ``sin`` on ``x`` with ``x`` inside ``[0, pi/2]``.

    ``sin`` is increasing there, so the enclosure is
    ``[sin_lower(lo), sin_upper(hi)]``; each endpoint uses the alternating
    Taylor series whose consecutive partial sums bracket the value once the
    terms decrease in magnitude.
    """
    if x.lo < 0 or x.hi > Fraction(8, 5):
        raise InputError("sin_interval supports 0 <= x <= 1.6 only")

    def bracket(y: Fraction) -> tuple[Fraction, Fraction]:
        s = Fraction(0)
        term = y
        prev = None
        for n in range(terms):
            s_next = s + (term if n % 2 == 0 else -term)
            if prev is not None and n >= 2:
                lo, hi = sorted((s, s_next))
                if hi - lo < Fraction(1, 10**24):
                    return lo, hi
            prev = s
            s = s_next
            term = term * y * y / ((2 * n + 2) * (2 * n + 3))
        lo, hi = sorted((prev, s))
        return lo, hi

    lo, _ = bracket(x.lo)
    _, hi = bracket(x.hi)
    return Interval(lo, hi)
