"""Closed float intervals with outward rounding.

Logarithms of exact rationals are evaluated with ``mpmath.iv`` at high
precision and widened by one ulp on export, so every enclosure produced here
contains the true real number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

_IV = mpmath.iv
_IV.prec = 120

_INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _frac_bounds(q: Fraction) -> tuple[float, float]:
    """Floats lo <= q <= hi."""
    try:
        f = float(q)
    except OverflowError:
        big = 1.7976931348623157e308
        return (big, _INF) if q > 0 else (-_INF, -big)
    lo = f if Fraction(f) <= q else _down(f)
    hi = f if Fraction(f) >= q else _up(f)
    return lo, hi


def _two_sum(a: float, b: float) -> tuple[float, float]:
    """s = fl(a + b) and the exact rounding error a + b - s."""
    s = a + b
    if not math.isfinite(s):
        return s, 0.0
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _add_down(a: float, b: float) -> float:
    s, err = _two_sum(a, b)
    return _down(s) if err < 0 else s


def _add_up(a: float, b: float) -> float:
    s, err = _two_sum(a, b)
    return _up(s) if err > 0 else s


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    # constructors
    @classmethod
    def point(cls, x) -> "Interval":
        return cls(*_frac_bounds(Fraction(x)))

    @classmethod
    def hull(cls, *xs: "Interval") -> "Interval":
        return cls(min(x.lo for x in xs), max(x.hi for x in xs))

    # queries
    @property
    def width(self) -> float:
        return _up(self.hi - self.lo)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def widen(self, r: float) -> "Interval":
        return Interval(_down(self.lo - r), _up(self.hi + r))

    # arithmetic
    def __add__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        return Interval(_add_down(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        return self + (-o)

    def __rsub__(self, other) -> "Interval":
        return (-self) + other

    def __mul__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        if (self.lo == self.hi == 0) or (o.lo == o.hi == 0):
            return ZERO
        ps = [a * b for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        ps = [0.0 if math.isnan(p) else p for p in ps]
        return Interval(_down(min(ps)), _up(max(ps)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        ps = [a / b for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval(_down(min(ps)), _up(max(ps)))

    def max(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), max(self.hi, other.hi))

    def min(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), min(self.hi, other.hi))

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


ZERO = Interval(0.0, 0.0)


def _from_iv(x) -> Interval:
    a, b = float(x.a), float(x.b)
    return Interval(_down(a), _up(b))


def log_abs(x) -> Interval:
    """Enclosure of log|x| for a nonzero rational x (exactly 0 when |x| = 1)."""
    q = abs(Fraction(x))
    if q == 0:
        raise ValueError("log of zero")
    if q == 1:
        return ZERO
    v = _IV.log(_IV.mpf(q.numerator)) - _IV.log(_IV.mpf(q.denominator))
    return _from_iv(v)


def log_plus(x) -> Interval:
    """log max(1, |x|)."""
    return log_abs(x) if abs(Fraction(x)) > 1 else ZERO


def log_sqrt_ratio(num: int, den: int) -> Interval:
    """Enclosure of (1/2) log(num/den) for positive integers."""
    return log_abs(Fraction(num, den)) * Fraction(1, 2)


def weighted_log_sum(pairs) -> Interval:
    """Sum of w * log|x| over (x, w) pairs with rational weights."""
    total = ZERO
    for x, w in pairs:
        if w:
            total = total + log_abs(x) * Fraction(w)
    return total


LOG2 = log_abs(2)


def fraction_upper(x: Interval) -> Fraction:
    return Fraction(x.hi)


def fraction_lower(x: Interval) -> Fraction:
    return Fraction(x.lo)
