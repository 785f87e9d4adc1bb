from fractions import Fraction

import mpmath
from hypothesis import given
from hypothesis import strategies as st

from divheight.intervals import ZERO, Interval, log_abs

fracs = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)


@given(fracs, fracs)
def test_arithmetic_encloses_exact(a, b):
    A, B = Interval.point(a), Interval.point(b)
    assert A.contains(float(a)) or Fraction(A.lo) <= a <= Fraction(A.hi)
    s = A + B
    assert Fraction(s.lo) <= a + b <= Fraction(s.hi)
    p = A * B
    assert Fraction(p.lo) <= a * b <= Fraction(p.hi)
    if b != 0:
        q = A / B
        assert Fraction(q.lo) <= a / b <= Fraction(q.hi)


@given(st.fractions(min_value=Fraction(1, 10**9), max_value=10**12))
def test_log_abs_encloses_high_precision(x):
    iv = log_abs(x)
    with mpmath.workdps(60):
        exact = mpmath.log(mpmath.mpf(x.numerator) / x.denominator)
        assert mpmath.mpf(iv.lo) <= exact <= mpmath.mpf(iv.hi)
    assert iv.width < 1e-12 * max(1.0, abs(iv.mid))


def test_log_of_one_is_exact_zero():
    assert log_abs(-1) == ZERO


def test_huge_fraction_point():
    big = Interval.point(Fraction(10**400))
    assert big.hi == float("inf")
