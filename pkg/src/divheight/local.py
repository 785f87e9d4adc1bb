"""Analysis at a single place of Q.

Finite-place quantities are exact multiples of log p and are carried as
``Fraction`` units; archimedean quantities are ``Interval`` enclosures.  The
escape rates of points and forms are enclosed by iterating the map and
applying the geometric tail bounds at the last iterate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np
import sympy

from . import kernels
from .intervals import LOG2, ZERO, Interval, log_abs, log_plus
from .poly import (
    HomogeneousForm,
    PolyMap,
    PrimitiveForm,
    coprime_integer_point,
    factor_form,
    jacobian_form,
    primitive_part,
)
from .resultant import NotAMorphism, binary_coeffs, macaulay_resultant, push_forward_power

# ---------------------------------------------------------------------------
# places and exact finite-place values


@dataclass(frozen=True)
class Place:
    """The archimedean place (``prime is None``) or a prime p."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None and not sympy.isprime(self.prime):
            raise ValueError(f"{self.prime} is not prime")

    @property
    def is_archimedean(self) -> bool:
        return self.prime is None

    @classmethod
    def parse(cls, text: str) -> "Place":
        t = str(text).strip().lower()
        if t in {"inf", "infinity", "oo", "archimedean"}:
            return cls()
        return cls(int(t))

    def __str__(self) -> str:
        return "inf" if self.prime is None else str(self.prime)


INFINITY = Place()


def valuation(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(x)
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, m = q.numerator, q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while m % p == 0:
        m //= p
        v -= 1
    return v


def _units(lo: Fraction, hi: Fraction, p: int) -> Interval:
    """[lo, hi] * log p as a float enclosure."""
    lp = log_abs(p)
    return Interval.hull(lp * lo, lp * hi)


@dataclass(frozen=True)
class LocalMeasure:
    """A local logarithmic quantity; ``exact`` is its coefficient of log p at a
    finite place."""

    place: Place
    enclosure: Interval
    exact: Fraction | None = None

    @classmethod
    def at(cls, place: Place, units: Fraction | None = None, enclosure: Interval | None = None) -> "LocalMeasure":
        if place.is_archimedean:
            return cls(place, enclosure)
        return cls(place, _units(units, units, place.prime), Fraction(units))

    @property
    def value(self) -> float:
        return self.enclosure.mid


def log_abs_at(x, place: Place) -> LocalMeasure:
    if place.is_archimedean:
        return LocalMeasure(place, log_abs(x))
    return LocalMeasure.at(place, Fraction(-valuation(x, place.prime)))


def log_norm_at(values: Sequence, place: Place) -> LocalMeasure:
    """log max |x|_v over nonzero rationals."""
    vals = [Fraction(x) for x in values if x]
    if not vals:
        raise ValueError("all values are zero")
    if place.is_archimedean:
        return LocalMeasure(place, log_abs(max(abs(x) for x in vals)))
    return LocalMeasure.at(place, Fraction(-min(valuation(x, place.prime) for x in vals)))


def gauss_log_norm(phi: HomogeneousForm | PrimitiveForm, p: int) -> LocalMeasure:
    """log of the Gauss norm at p; ``exact`` holds k with value k*log p."""
    form = phi.reconstruct() if isinstance(phi, PrimitiveForm) else phi
    if form.is_zero():
        raise ValueError("zero form")
    return log_norm_at(form.terms.values(), Place(p))


# ---------------------------------------------------------------------------
# Mahler measure


def _is_linear_binary(phi: HomogeneousForm) -> bool:
    return phi.num_vars == 2 and phi.degree == 1


def mahler_bracket(phi: HomogeneousForm) -> Interval:
    """Certified enclosure of the logarithmic Mahler measure.

    Monomials and linear binary forms are exact.  Otherwise the two-sided
    sup-norm/L1 estimates are intersected with m <= log L2 and with the
    lower bound from Newton-polytope vertex coefficients.
    """
    if phi.is_zero():
        raise ValueError("Mahler measure of the zero form")
    terms = phi.items()
    if len(terms) == 1:
        return log_abs(terms[0][1])
    if _is_linear_binary(phi):
        return log_abs(max(abs(c) for _, c in terms))
    N, e = phi.num_vars - 1, phi.degree
    sup = log_abs(max(abs(c) for _, c in terms))
    l1 = log_abs(sum(abs(c) for _, c in terms))
    l2 = log_abs(sum(c * c for _, c in terms)) * Fraction(1, 2)
    upper = (sup + log_abs(e + 1) * Fraction(N, 2)).min(l1).min(l2)
    vertex = log_abs(max(abs(terms[0][1]), abs(terms[-1][1])))
    lower = (l1 - LOG2 * (N * e)).max(vertex)
    return Interval(lower.lo, max(lower.lo, upper.hi))


@dataclass(frozen=True)
class MahlerEstimate:
    value: float
    error: float
    converged: bool
    method: str
    certified: bool = False


def _log_float(q) -> float:
    q = abs(Fraction(q))
    return math.log(q.numerator) - math.log(q.denominator)


def _jensen_binary(phi: HomogeneousForm) -> float:
    """log|lc| + sum log+|root| of phi(x, 1), with roots from mpmath."""
    coeffs = [c for c in binary_coeffs(phi)]
    while coeffs and coeffs[0] == 0:  # factors of X1
        coeffs.pop(0)
    while coeffs and coeffs[-1] == 0:  # roots at x = 0
        coeffs.pop()
    den = math.lcm(*(c.denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    x = sympy.Symbol("x")
    content, parts = sympy.sqf_list(sympy.Poly(ints, x))
    total = _log_float(Fraction(int(content))) - math.log(den)
    for part, mult in parts:
        cs = [int(c) for c in part.all_coeffs()]
        total += mult * _log_float(cs[0])
        if len(cs) == 2:
            total += mult * max(0.0, _log_float(Fraction(cs[1], cs[0])))
            continue
        # mpf exponents are unbounded, so precision only has to cover root
        # conditioning, not the (possibly enormous) coefficient sizes
        dps = 30 + 8 * len(cs)
        with mpmath.workdps(dps):
            mcs = [mpmath.mpf(c) for c in cs]
            roots = mpmath.polyroots(mcs, maxsteps=400 + 20 * len(cs), extraprec=4 * dps)
            total += mult * float(sum(mpmath.log(abs(r)) for r in roots if abs(r) > 1))
    return total


def _jensen_torus(phi: HomogeneousForm, tol: float, max_points: int) -> tuple[float, float, bool]:
    """Trapezoid rule over x_1..x_{N-1} of the Jensen value in x_N (x_0 = 1)."""
    N = phi.num_vars - 1
    items = phi.items()
    scale = max(abs(c) for _, c in items)
    coeffs = np.array([float(c / scale) for _, c in items], dtype=np.complex128)
    exps = np.array([e for e, _ in items], dtype=np.int64)
    top = int(exps[:, N].max())
    cols = top - exps[:, N]
    m, prev, err = 8, None, math.inf
    while True:
        if N > 1:
            axes = [(np.arange(m) + 0.5) * (2 * np.pi / m)] * (N - 1)
            grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
            vals = np.exp(1j * (grid @ exps[:, 1:N].T.astype(np.float64))) * coeffs
        else:
            vals = coeffs[None, :]
        rows = np.zeros((vals.shape[0], top + 1), dtype=np.complex128)
        for t in range(len(items)):
            rows[:, cols[t]] += vals[:, t]
        est = float(np.mean(kernels.jensen_rows(rows)))
        if prev is not None:
            err = abs(est - prev)
        if N == 1 or err < tol:
            return _log_float(scale) + est, (0.0 if N == 1 else err), True
        prev = est
        m *= 2
        if m ** (N - 1) > max_points:
            return _log_float(scale) + est, err, False


def _drop_absent_variables(phi: HomogeneousForm) -> HomogeneousForm:
    """Variables that do not occur leave the torus average unchanged."""
    used = [i for i in range(phi.num_vars) if any(e[i] for e in phi.terms)]
    if len(used) == phi.num_vars or len(used) < 2:
        return phi
    return HomogeneousForm(len(used), phi.degree, {tuple(e[i] for i in used): c for e, c in phi.terms.items()})


def mahler_estimate(phi: HomogeneousForm, tol: float = 1e-8, max_points: int = 1 << 20) -> MahlerEstimate:
    """Non-certified numerical Mahler measure (Jensen's formula plus quadrature)."""
    if phi.is_zero():
        raise ValueError("Mahler measure of the zero form")
    terms = phi.items()
    if len(terms) == 1:
        return MahlerEstimate(_log_float(terms[0][1]), 0.0, True, "monomial")
    phi = _drop_absent_variables(phi)
    if phi.num_vars == 2:
        try:
            return MahlerEstimate(_jensen_binary(phi), 0.0, True, "jensen-roots")
        except mpmath.libmp.NoConvergence:
            value, err, ok = _jensen_torus(phi, tol, max_points)
            return MahlerEstimate(value, err, ok, "jensen-float")
    value, err, ok = _jensen_torus(phi, tol, max_points)
    return MahlerEstimate(value, err, ok, "jensen-slices")


RAW_MAX_POINTS = 1 << 12


def mahler_value_estimate(phi: HomogeneousForm) -> float:
    """Point estimate used in raw sequences (exact where cheap)."""
    if _is_linear_binary(phi) or len(phi.terms) == 1:
        return _log_float(max(abs(c) for c in phi.terms.values()))
    # raw sequences only need ~1e-7; past this the slices dominate the run time
    return mahler_estimate(phi, tol=1e-10, max_points=RAW_MAX_POINTS).value


# ---------------------------------------------------------------------------
# lifts, lambda_Hom and the explicit constants


@dataclass(frozen=True)
class Lift:
    """F = scale * G with G primitive integral; res = Res(G)."""

    F: PolyMap
    G: PolyMap
    scale: Fraction
    res: int

    @property
    def N(self) -> int:
        return self.F.N

    @property
    def d(self) -> int:
        return self.F.d


@lru_cache(maxsize=128)
def lift_of(F: PolyMap) -> Lift:
    G, c = F.primitive_lift()
    res = macaulay_resultant(G)
    if res == 0:
        raise NotAMorphism("Res(F) = 0: not a morphism")
    if F.d < 2:
        raise ValueError("dynamical operations need degree d >= 2")
    return Lift(F, G, c, int(res))


def lambda_hom(F: PolyMap, v: Place) -> LocalMeasure:
    """-log|Res(F)|_v + (N+1) d^N log||F||_v."""
    res = macaulay_resultant(F)
    if res == 0:
        raise NotAMorphism("Res(F) = 0: not a morphism")
    w = (F.N + 1) * F.d**F.N
    norm = log_norm_at(F.coefficients(), v)
    if v.is_archimedean:
        return LocalMeasure(v, norm.enclosure * w - log_abs(res))
    return LocalMeasure.at(v, valuation(res, v.prime) + w * norm.exact)


@lru_cache(maxsize=None)
def closed_rs(N: int, d: int) -> tuple[int, int]:
    r = (N + 1) * (d + 1) ** N * (d**N + 1) ** ((N + 1) * (d + 1) ** N)
    s = ((N + 1) * (d - 1) + 2) ** N
    return r, s


@lru_cache(maxsize=None)
def closed_c1(N: int, d: int) -> Interval:
    """r log(2^(s+1) r s^s) at the archimedean place."""
    r, s = closed_rs(N, d)
    return log_abs(2 ** (s + 1) * r * s**s) * r


@lru_cache(maxsize=None)
def closed_c3_inf(N: int, d: int) -> Interval:
    return (
        log_plus(N + 1)
        + log_plus(N * (d - 1) + 1) * N
        + log_plus((N + 1) * d**N) * (d + 1) ** N
        + closed_c1(N, d)
    )


@lru_cache(maxsize=None)
def closed_c4_inf(N: int, d: int) -> Interval:
    return log_abs(d + 1) * N


# -- map-specific constants on P^1 -------------------------------------------

_SQRT2_UP = Fraction(141421357, 10**8)
_ROOT_SCALE = 1 << 64


def _sqrt_down(q: Fraction) -> Fraction:
    n = q.numerator * _ROOT_SCALE**2 // q.denominator
    return Fraction(math.isqrt(n), _ROOT_SCALE)


def _sqrt_up(q: Fraction) -> Fraction:
    n = -((-q.numerator * _ROOT_SCALE**2) // q.denominator)
    r = math.isqrt(n)
    if r * r < n:
        r += 1
    return Fraction(r, _ROOT_SCALE)


def _taylor_moduli_sq(desc: list[Fraction], cx: Fraction, cy: Fraction) -> list[Fraction]:
    """|t_k|^2 for the Taylor coefficients of a polynomial at c = cx + i cy."""
    b = [(c, Fraction(0)) for c in desc]
    out = []
    while b:
        ar, ai = Fraction(0), Fraction(0)
        q = []
        for br, bi in b:
            ar, ai = ar * cx - ai * cy + br, ar * cy + ai * cx + bi
            q.append((ar, ai))
        out.append(ar * ar + ai * ai)
        b = q[:-1]
    return out


def _chart_min_lower(polys: list[list[Fraction]], rel: Fraction, max_boxes: int) -> Fraction:
    """Lower bound for min over |z| <= 1 of max_i |p_i(z)|, by subdivision."""
    heap: list = []
    best = [None]
    counter = [0]

    def push(cx: Fraction, cy: Fraction, w: Fraction):
        rho = w * _SQRT2_UP
        r2 = cx * cx + cy * cy
        if r2 > (1 + rho) ** 2:
            return
        lb = None
        center = Fraction(0)
        for p in polys:
            t = _taylor_moduli_sq(p, cx, cy)
            val = _sqrt_down(t[0])
            bound = val
            rk = Fraction(1)
            for tk in t[1:]:
                rk *= rho
                if tk:
                    bound -= _sqrt_up(tk) * rk
            lb = bound if lb is None else max(lb, bound)
            center = max(center, _sqrt_up(t[0]))
        if r2 <= 1 and (best[0] is None or center < best[0]):
            best[0] = center
        counter[0] += 1
        heapq.heappush(heap, (lb, counter[0], cx, cy, w))

    w0 = Fraction(1, 4)
    for i in range(4):
        for j in range(4):
            push(Fraction(2 * i - 3, 4), Fraction(2 * j - 3, 4), w0)
    while heap and counter[0] < max_boxes:
        lb = heap[0][0]
        if lb > 0 and best[0] is not None and lb >= best[0] * (1 - rel):
            break
        _, _, cx, cy, w = heapq.heappop(heap)
        h = w / 2
        for sx in (-1, 1):
            for sy in (-1, 1):
                push(cx + sx * h, cy + sy * h, h)
    return heap[0][0] if heap else Fraction(0)


@lru_cache(maxsize=64)
def min_norm_lower_bound(F: PolyMap, rel: Fraction = Fraction(1, 64), max_boxes: int = 40000) -> Fraction | None:
    """Certified mu with ||F(P)|| >= mu ||P||^d for all P in C^2 (N = 1 only).

    The unit sphere of the sup norm is covered, up to unimodular scalars, by
    the charts (1, z) and (z, 1) with |z| <= 1; each is subdivided into boxes
    on which a Taylor remainder bound is evaluated in exact arithmetic.
    """
    if F.N != 1:
        return None
    d = F.d
    comps = [binary_coeffs(c) for c in F.components]
    # chart (1, z): coefficient of z^j is c_j; chart (z, 1): coefficient of z^(d-j)
    chart_a = [list(reversed(c)) for c in comps]
    chart_b = [list(c) for c in comps]
    mu = min(_chart_min_lower(chart_a, rel, max_boxes), _chart_min_lower(chart_b, rel, max_boxes))
    return mu if mu > 0 else None


# -- assembled constants -------------------------------------------------------


@dataclass(frozen=True)
class LocalConstants:
    """Explicit constants at one place for one lift.

    ``c3``..``c6`` follow the closed forms; ``c3_eff``/``c4_eff`` take
    the minimum with certified map-specific values (archimedean, N = 1) and
    ``c5_eff``/``c6_eff`` are rebuilt from them.
    """

    place: Place
    N: int
    d: int
    r: int
    s: int
    c1: Interval
    c3: Interval
    c4: Interval
    c5: Interval
    c6: Interval
    lambda_hom: LocalMeasure
    log_sup_F: LocalMeasure
    c3_sharp: Interval | None = None
    c4_sharp: Interval | None = None
    c3_eff: Interval = ZERO
    c4_eff: Interval = ZERO
    c5_eff: Interval = ZERO
    c6_eff: Interval = ZERO


def _c5(N, d, lam, c3, c4, logF, arch: bool) -> Interval:
    dn = d**N
    out = lam * (dn * (d ** (N + 1) - 1)) + (c3 + c4) * (dn * (d ** (N + 1) - 1)) + logF * dn
    if arch:
        out = out + LOG2 * (N * dn * (d ** (N + 2) + 1)) + log_abs(d + 1) * (N * dn)
    return out


def _c6(N, d, lam, c3, logF, arch: bool) -> Interval:
    dn = d**N
    out = lam * dn - logF * dn + c3 * dn
    if arch:
        out = out + LOG2 * (d ** (N + 1) * N)
    return out


def sharp_constants(F: PolyMap) -> tuple[Interval | None, Interval]:
    """Map-specific archimedean (c3, c4) valid in the point-estimate inequality."""
    logF = log_abs(F.sup_norm())
    l1 = log_abs(max(c.l1_norm() for c in F.components))
    c4 = l1 - logF
    mu = min_norm_lower_bound(F)
    if mu is None:
        return None, c4
    lam = lambda_hom(F, INFINITY).enclosure
    c3 = logF - lam - log_abs(mu)
    # never below zero: the closed-form constants are nonnegative and downstream
    # estimates are only claimed in that regime
    return Interval(max(c3.lo, 0.0), max(c3.hi, 0.0)), c4


def local_constants(F: PolyMap, v: Place, sharp: bool = True) -> LocalConstants:
    N, d = F.N, F.d
    r, s = closed_rs(N, d)
    lam = lambda_hom(F, v)
    logF = log_norm_at(F.coefficients(), v)
    arch = v.is_archimedean
    if arch:
        c1, c3, c4 = closed_c1(N, d), closed_c3_inf(N, d), closed_c4_inf(N, d)
    else:
        c1 = c3 = c4 = ZERO
    c5 = _c5(N, d, lam.enclosure, c3, c4, logF.enclosure, arch)
    c6 = _c6(N, d, lam.enclosure, c3, logF.enclosure, arch)
    c3s = c4s = None
    c3e, c4e = c3, c4
    if arch and sharp:
        c3s, c4s = sharp_constants(F)
        if c3s is not None and c3s.hi < c3.hi:
            c3e = c3s
        if c4s.hi < c4.hi:
            c4e = c4s
    c5e = _c5(N, d, lam.enclosure, c3e, c4e, logF.enclosure, arch)
    c6e = _c6(N, d, lam.enclosure, c3e, logF.enclosure, arch)
    return LocalConstants(v, N, d, r, s, c1, c3, c4, c5, c6, lam, logF, c3s, c4s, c3e, c4e, c5e, c6e)


def point_estimate_check(F: PolyMap, P: Sequence, v: Place, sharp: bool = False) -> tuple[bool, Interval, Interval, Interval]:
    """Both sides of d log||P|| - lambda + log||F|| - c3 <= log||F(P)|| <= d log||P|| + log||F|| + c4.

    Returns (holds, lower, middle, upper); ``holds`` compares enclosures
    conservatively (lower.lo <= middle.hi and middle.lo <= upper.hi).
    """
    k = local_constants(F, v, sharp=sharp)
    c3, c4 = (k.c3_eff, k.c4_eff) if sharp else (k.c3, k.c4)
    logP = log_norm_at(P, v).enclosure
    logF = k.log_sup_F.enclosure
    mid = log_norm_at(F(P), v).enclosure
    lower = logP * F.d - k.lambda_hom.enclosure + logF - c3
    upper = logP * F.d + logF + c4
    return (lower.lo <= mid.hi and mid.lo <= upper.hi), lower, mid, upper


# ---------------------------------------------------------------------------
# orbits


class PointOrbit:
    """F^k(P) = S_k R_k with R_k coprime integers; log|S_k|/d^k is kept as
    (value, weight) pairs."""

    def __init__(self, G: PolyMap, P: Sequence):
        R, s = coprime_integer_point(P)
        self.G = G
        self.R = R
        self.k = 0
        self.scalars: list[tuple[Fraction, Fraction]] = [(s, Fraction(1))]

    def step(self) -> None:
        image = self.G.apply_int(self.R)
        g = math.gcd(*image)
        if g == 0:
            raise NotAMorphism("orbit hit the origin")
        self.k += 1
        self.R = tuple(x // g for x in image)
        self.scalars.append((Fraction(g), Fraction(1, self.G.d**self.k)))

    def log_scalar(self, v: Place) -> tuple[Interval, Fraction | None]:
        if v.is_archimedean:
            total = ZERO
            for x, w in self.scalars:
                total = total + log_abs(x) * w
            return total, None
        units = sum((-valuation(x, v.prime) * w for x, w in self.scalars), Fraction(0))
        return _units(units, units, v.prime), units

    def log_norm(self, v: Place) -> Interval:
        """log||R_k||_v / d^k (zero at finite places)."""
        if not v.is_archimedean:
            return ZERO
        return log_abs(max(abs(x) for x in self.R)) * Fraction(1, self.G.d**self.k)

    def raw(self, v: Place) -> float:
        scal, _ = self.log_scalar(v)
        return scal.mid + self.log_norm(v).mid


class FormOrbit:
    """G_*^k phi kept as C_k * prod B_i^(n_i) with primitive integral B_i.

    log|C_k| / d^(k(N+1)) is stored as (value, weight) pairs; the factor list
    stays short because equal factors are merged and, on P^1, each pushforward
    is an explicit power.
    """

    def __init__(self, G: PolyMap, res: int, phi: HomogeneousForm, factor: bool = True):
        if phi.is_zero():
            raise ValueError("zero form does not define a divisor")
        if phi.num_vars != G.num_vars:
            raise ValueError("form and map act on different spaces")
        self.G, self.res = G, Fraction(res)
        self.N, self.d = G.N, G.d
        self.degree = phi.degree
        if factor and phi.degree > 0:
            scalar, factors = factor_form(phi)
        else:
            prim = primitive_part(phi)
            scalar, factors = prim.scalar, ([(prim.form, 1)] if phi.degree else [])
        self.scalars: list[tuple[Fraction, Fraction]] = [(scalar, Fraction(1))]
        self.factors: list[tuple[HomogeneousForm, int]] = factors
        self.k = 0
        self._cache: dict[HomogeneousForm, tuple[HomogeneousForm, int, Fraction]] = {}

    def _push(self, B: HomogeneousForm):
        hit = self._cache.get(B)
        if hit is None:
            image, power, const = push_forward_power(self.G, B, self.res)
            prim = primitive_part(image)
            hit = (prim.form, power, const * prim.scalar**power)
            self._cache[B] = hit
        return hit

    def step(self) -> None:
        self.k += 1
        w = Fraction(1, self.d ** (self.k * (self.N + 1)))
        merged: dict[HomogeneousForm, int] = {}
        for B, n in self.factors:
            B2, power, const = self._push(B)
            self.scalars.append((const, n * w))
            merged[B2] = merged.get(B2, 0) + n * power
        self.factors = list(merged.items())

    @property
    def norm_weight(self) -> Fraction:
        return Fraction(1, self.d ** (self.k * (self.N + 1)))

    @property
    def current_degree(self) -> int:
        return self.d ** (self.k * self.N) * self.degree

    def log_scalar(self, v: Place) -> tuple[Interval, Fraction | None]:
        if v.is_archimedean:
            total = ZERO
            for x, w in self.scalars:
                total = total + log_abs(x) * w
            return total, None
        units = sum((-valuation(x, v.prime) * w for x, w in self.scalars), Fraction(0))
        return _units(units, units, v.prime), units

    def mahler(self) -> Interval:
        """Enclosure of m_inf(prod B_i^n_i) / d^(k(N+1))."""
        total = ZERO
        for B, n in self.factors:
            total = total + mahler_bracket(B) * n
        return total * self.norm_weight

    def mahler_raw(self) -> float:
        w = float(self.norm_weight)
        return sum(n * mahler_value_estimate(B) for B, n in self.factors) * w

    def coefficient_bits(self) -> int:
        return max((max(abs(c.numerator) for c in B.terms.values()).bit_length() for B, _ in self.factors), default=0)

    def form(self) -> HomogeneousForm:
        """The primitive product prod B_i^n_i (expensive; for tests)."""
        out = HomogeneousForm.constant(self.G.num_vars, 1)
        for B, n in self.factors:
            out = out * B**n
        return out


# ---------------------------------------------------------------------------
# raw (non-certified) point escape rates, iterated far past the certified depth

RAW_DEPTH = 64


def _raw_archimedean(G: PolyMap, R: Sequence[int], depth: int) -> float:
    """log||R|| + sum_j log||G(x_j)|| / d^(j+1) with x_j sup-normalized."""
    d = G.d
    with mpmath.workdps(40):
        x = [mpmath.mpf(r) for r in R]
        top = max(abs(t) for t in x)
        total = mpmath.log(top)
        x = [t / top for t in x]
        comps = [[(e, mpmath.mpf(c.numerator) / c.denominator) for e, c in f.terms.items()] for f in G.components]
        for j in range(depth):
            y = [sum(c * mpmath.fprod(t**k for t, k in zip(x, e)) for e, c in comp) for comp in comps]
            top = max(abs(t) for t in y)
            total += mpmath.log(top) / d ** (j + 1)
            x = [t / top for t in y]
        return float(total)


def _raw_padic_units(G: PolyMap, R: Sequence[int], p: int, vres: int, depth: int) -> Fraction:
    """-sum_j v_p(gcd G(R_j)) / d^(j+1), the p-adic escape rate of primitive R in units of log p.

    Each step divides by at most p^vres, so R mod p^(depth*vres + vres + 1)
    carries enough precision for ``depth`` steps.
    """
    prec = depth * vres + vres + 1
    mod = p**prec
    r = [x % mod for x in R]
    total = Fraction(0)
    for j in range(depth):
        y = [int(f.evaluate(r)) % mod for f in G.components]
        w = min(valuation(t, p) if t else prec for t in y)
        if w >= prec:  # pragma: no cover - excluded by the choice of prec
            raise ArithmeticError("p-adic precision exhausted")
        total -= Fraction(w, G.d ** (j + 1))
        prec -= w
        mod = p**prec
        r = [(t // p**w) % mod for t in y]
    return total


def raw_escape_rate(lift: Lift, P: Sequence, v: Place, depth: int = RAW_DEPTH) -> float:
    """Non-certified G_{F,v}(P) from a deep floating (or p-adic residue) orbit."""
    R, scale = coprime_integer_point(P)
    d = lift.d
    shift = log_abs_at(scale, v).value + log_abs_at(lift.scale, v).value / (d - 1)
    if v.is_archimedean:
        return _raw_archimedean(lift.G, R, depth) + shift
    vres = valuation(lift.res, v.prime)
    if vres == 0:
        return shift
    return float(_raw_padic_units(lift.G, R, v.prime, vres, depth)) * math.log(v.prime) + shift


@lru_cache(maxsize=32)
def _res_primes(res: int) -> tuple[tuple[int, int], ...] | None:
    if abs(res) == 1:
        return ()
    if abs(res) > 10**30:
        return None
    return tuple(sorted(sympy.factorint(abs(res)).items()))


def raw_global_height(lift: Lift, P: Sequence, depth: int = RAW_DEPTH) -> float | None:
    """sum_v G_v(R) for coprime integral R; None if Res(G) is too large to factor."""
    R, _ = coprime_integer_point(P)
    primes = _res_primes(lift.res)
    if primes is None:
        return None
    total = _raw_archimedean(lift.G, R, depth)
    for p, vres in primes:
        total += float(_raw_padic_units(lift.G, R, p, vres, depth)) * math.log(p)
    return total


# ---------------------------------------------------------------------------
# escape rates


DEFAULT_MAX_K = {1: 20, 2: 2}


def default_max_k(N: int) -> int:
    return DEFAULT_MAX_K.get(N, 1)


@dataclass(frozen=True)
class EscapeRate:
    place: Place
    enclosure: Interval
    k_used: int
    converged: bool
    raw_estimate: float
    target_eps: float
    exact: tuple[Fraction, Fraction] | None = None  # [lo, hi] in units of log p

    @property
    def width(self) -> float:
        return self.enclosure.width


def _point_tail(lift: Lift, consts: LocalConstants, k: int) -> tuple[Interval, Interval]:
    """Bounds on (G_G(R_k) - log||R_k||) / d^k."""
    d = lift.d
    scale = Fraction(1, (d - 1) * d**k)
    base = consts.log_sup_F.enclosure
    lo = (base - consts.c3_eff - consts.lambda_hom.enclosure) * scale
    hi = (base + consts.c4_eff) * scale
    return lo, hi


def point_escape_rate(F: PolyMap, P: Sequence, v: Place = INFINITY, eps: float = 0.5, max_k: int | None = None, sharp: bool = True) -> EscapeRate:
    """Certified enclosure of G_{F,v}(P)."""
    lift = lift_of(F)
    if not any(P):
        raise ValueError("the zero vector is not a point")
    max_k = default_max_k(F.N) if max_k is None else max_k
    consts = local_constants(lift.G, v, sharp=sharp)
    orbit = PointOrbit(lift.G, P)
    d = lift.d
    while True:
        scal, units = orbit.log_scalar(v)
        if v.is_archimedean:
            tail_lo, tail_hi = _point_tail(lift, consts, orbit.k)
            base = scal + orbit.log_norm(v) + log_abs(lift.scale) * Fraction(1, d - 1)
            enc = Interval((base + tail_lo).lo, (base + tail_hi).hi)
            exact = None
        else:
            lam = consts.lambda_hom.exact
            shift = units + Fraction(-valuation(lift.scale, v.prime), d - 1)
            lo_u = shift - lam / ((d - 1) * d**orbit.k)
            exact = (lo_u, shift)
            enc = _units(lo_u, shift, v.prime)
        done = enc.width <= eps
        if done or orbit.k >= max_k:
            return EscapeRate(v, enc, orbit.k, done, raw_escape_rate(lift, P, v), eps, exact)
        orbit.step()


def _form_interval(orbit: FormOrbit, lift: Lift, consts: LocalConstants, v: Place) -> tuple[Interval, tuple | None]:
    N, d = lift.N, lift.d
    deg = orbit.degree
    tail = Fraction(deg, d**N * (d - 1) * d**orbit.k)
    scal, units = orbit.log_scalar(v)
    if v.is_archimedean:
        base = scal + orbit.mahler() - log_abs(lift.scale) * Fraction(deg, d - 1)
        lo = base - consts.c5_eff * tail
        hi = base + consts.c6_eff * tail
        return Interval(lo.lo, hi.hi), None
    lam = consts.lambda_hom.exact
    dn = d**N
    c5 = dn * (d ** (N + 1) - 1) * lam + dn * consts.log_sup_F.exact
    c6 = dn * lam - dn * consts.log_sup_F.exact
    shift = units - Fraction(deg * -valuation(lift.scale, v.prime), d - 1)
    lo_u, hi_u = shift - c5 * tail, shift + c6 * tail
    return _units(lo_u, hi_u, v.prime), (lo_u, hi_u)


def form_escape_rate(F: PolyMap, phi: HomogeneousForm, v: Place = INFINITY, eps: float = 0.5, max_k: int | None = None, sharp: bool = True) -> EscapeRate:
    """Certified enclosure of G_{F,v}(phi) = lim m_v(F_*^k phi) / d^(k(N+1))."""
    lift = lift_of(F)
    max_k = default_max_k(F.N) if max_k is None else max_k
    consts = local_constants(lift.G, v, sharp=sharp)
    orbit = FormOrbit(lift.G, lift.res, phi)
    d = lift.d
    while True:
        enc, exact = _form_interval(orbit, lift, consts, v)
        done = enc.width <= eps
        if done or orbit.k >= max_k:
            scal, _ = orbit.log_scalar(v)
            raw = scal.mid - phi.degree * log_abs_at(lift.scale, v).value / (d - 1)
            if v.is_archimedean:
                raw += orbit.mahler_raw()
            return EscapeRate(v, enc, orbit.k, done, raw, eps, exact)
        orbit.step()


# ---------------------------------------------------------------------------
# Green pairing and the Lyapunov estimator


@dataclass(frozen=True)
class GreenPairing:
    place: Place
    enclosure: Interval | None
    infinite: bool = False
    form_rate: EscapeRate | None = None
    point_rate: EscapeRate | None = None
    raw_estimate: float | None = None


def green_pairing(F: PolyMap, phi: HomogeneousForm, Q: Sequence, v: Place = INFINITY, eps: float = 0.5, max_k: int | None = None) -> GreenPairing:
    """-log|phi(Q)|_v + G_v(phi) + deg(phi) G_v(Q); infinite when phi(Q) = 0."""
    value = phi.evaluate(Q)
    if value == 0:
        return GreenPairing(v, None, infinite=True)
    e = phi.degree
    fr = form_escape_rate(F, phi, v, eps / 2, max_k)
    pr = point_escape_rate(F, Q, v, eps / (2 * max(e, 1)), max_k)
    first = log_abs_at(value, v)
    enc = fr.enclosure + pr.enclosure * e - first.enclosure
    raw = fr.raw_estimate + e * pr.raw_estimate - first.value
    return GreenPairing(v, enc, False, fr, pr, raw)


def green_pairing_sum(F: PolyMap, phi: HomogeneousForm, points: Sequence[tuple[int, Sequence]], v: Place = INFINITY, eps: float = 0.5, max_k: int | None = None) -> GreenPairing:
    """Linear extension over a formal combination ``[(n_i, Q_i), ...]`` of points.

    Only single-degree points are modelled, so mixed-degree combinations are untested.
    """
    if not points:
        raise ValueError("empty point combination")
    weight = sum(abs(n) for n, _ in points) or 1
    parts = [green_pairing(F, phi, Q, v, eps / weight, max_k) for _, Q in points]
    if any(g.infinite for g in parts):
        return GreenPairing(v, None, infinite=True)
    enc = Interval.point(0.0)
    raw = 0.0
    for (n, _), g in zip(points, parts):
        enc = enc + g.enclosure * n
        raw += n * g.raw_estimate
    return GreenPairing(v, enc, False, parts[0].form_rate, None, raw)


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    enclosure: Interval
    k_used: int
    certified: bool = False


def lyapunov_estimate(F: PolyMap, eps: float = 0.05, max_k: int | None = None) -> LyapunovEstimate:
    """G_inf(J_F) - log d from the form escape rate of the Jacobian determinant."""
    J = jacobian_form(F)
    rate = form_escape_rate(F, J, INFINITY, eps, max_k)
    logd = log_abs(F.d)
    return LyapunovEstimate(rate.raw_estimate - math.log(F.d), rate.enclosure - logd, rate.k_used)
