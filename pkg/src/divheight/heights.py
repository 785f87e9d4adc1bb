"""Global heights over Q.

For a primitive integral lift G and primitive integral forms, every finite
place contributes only through the tail constants, and those sum to
multiples of log|Res(G)|.  The canonical height of a divisor is therefore
enclosed by one archimedean Mahler bracket of the k-th pushforward plus a
tail that decays like d^-k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy

from .intervals import LOG2, ZERO, Interval, log_abs
from .local import (
    INFINITY,
    FormOrbit,
    LocalConstants,
    Place,
    PointOrbit,
    default_max_k,
    lift_of,
    local_constants,
    mahler_bracket,
    mahler_value_estimate,
    closed_c3_inf,
    closed_c4_inf,
    closed_rs,
    raw_global_height,
)
from .poly import HomogeneousForm, PolyMap, factor_form, jacobian_form

# factor Res(G) for per-place reporting only below this size
FACTOR_LIMIT = 10**30


@dataclass(frozen=True)
class HeightInterval:
    lo: float
    hi: float
    k_used: int
    budget_kind: str
    converged: bool
    raw_estimate: float | None = None
    target_eps: float | None = None

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError("lo > hi")

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def width(self) -> float:
        return self.interval.width

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "HeightInterval | Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


# ---------------------------------------------------------------------------
# naive heights


def weil_height_map(F: PolyMap) -> Interval:
    """Projective Weil height of the coefficient tuple of F."""
    G, _ = F.primitive_lift()
    return log_abs(G.sup_norm())


def philippon_height(phi: HomogeneousForm) -> HeightInterval:
    """Height of the divisor phi = 0: archimedean Mahler measure of the
    primitive integral form (finite places then vanish)."""
    if phi.is_zero():
        raise ValueError("zero form does not define a divisor")
    _, factors = factor_form(phi) if phi.degree else (None, [])
    enc = ZERO
    raw = 0.0
    for B, n in factors:
        enc = enc + mahler_bracket(B) * n
        raw += n * mahler_value_estimate(B)
    kind = "exact" if enc.lo == enc.hi or enc.width < 1e-12 else "mahler-bracket"
    return HeightInterval(enc.lo, enc.hi, 0, kind, True, raw)


# ---------------------------------------------------------------------------
# error budget


@dataclass(frozen=True)
class ErrorBudget:
    N: int
    d: int
    C1: int
    C2: int
    logC2: Interval
    h_hom: Interval
    log_res: Interval
    c8_closed: Interval
    c8: Interval
    c9_closed: Interval
    c9_derived: Interval
    c9: Interval
    B_upper: Interval
    B_lower: Interval
    B_refined: Interval
    sharp_upper: Interval
    sharp_lower: Interval
    per_place: tuple[LocalConstants, ...] = field(default_factory=tuple)
    finite_places_aggregated: bool = False

    def coarse_bound(self, degree: int) -> Fraction:
        """(C1 h(f) + C2) deg, rounded up, as an exact rational."""
        return (self.C1 * Fraction(self.h_hom.hi) + self.C2) * degree

    @property
    def refined_le_coarse(self) -> bool:
        return Fraction(self.B_refined.hi) <= self.coarse_bound(1)


def theorem1_constants(N: int, d: int) -> tuple[int, int]:
    C1 = 5 * N * d ** (N + 1)
    C2 = 3**N * N ** (N + 1) * (2 * d) ** (N * 2 ** (N + 4) * d**N)
    return C1, C2


def _closed_c8(N: int, d: int) -> Interval:
    r, s = closed_rs(N, d)
    total = (
        log_abs(N + 1)
        + log_abs(N * (d - 1) + 1) * N
        + log_abs((N + 1) * d**N) * (d + 1) ** N
        + LOG2 * (r * (s + 1))
        + log_abs(r)
        + log_abs(s) * s
        + LOG2 * (d * N)
    )
    return total * Fraction(1, d - 1)


def error_budget(F: PolyMap, per_place: bool = True) -> ErrorBudget:
    lift = lift_of(F)
    N, d, G = lift.N, lift.d, lift.G
    C1, C2 = theorem1_constants(N, d)
    h = weil_height_map(F)
    log_res = log_abs(lift.res)
    c3, c4 = closed_c3_inf(N, d), closed_c4_inf(N, d)
    inv = Fraction(1, d - 1)
    c8p = _closed_c8(N, d)
    # the closed expansion of c1 drops a factor r on log r + s log s
    c8 = (c3 + LOG2 * (d * N)) * inv
    logd1 = log_abs(d + 1)
    c9p = (LOG2 * (N * (d ** (N + 2) + 1)) + (c8 + logd1 * N) * (d ** (N + 1) - 1) + logd1 * N) * inv
    c9d = (LOG2 * (N * (d ** (N + 2) + 1)) + (c3 + c4) * (d ** (N + 1) - 1) + logd1 * N) * inv
    c9 = c9p.max(c9d)
    a_up = Fraction((N + 1) * d**N - 1, d - 1)
    a_lo = Fraction((N + 1) * d**N * (d ** (N + 1) - 1) + 1, d - 1)
    B_upper = h * a_up + c8
    B_lower = h * a_lo + c9
    B_refined = B_upper.max(B_lower)

    inf_consts = local_constants(G, INFINITY)
    dn = d**N
    scale = Fraction(1, dn * (d - 1))
    sharp_upper = (inf_consts.c6_eff + log_res * dn) * scale
    sharp_lower = (inf_consts.c5_eff + log_res * (dn * (d ** (N + 1) - 1))) * scale

    places = [inf_consts]
    aggregated = False
    if per_place and lift.res not in (1, -1):
        if abs(lift.res) < FACTOR_LIMIT:
            for p in sorted(sympy.factorint(abs(lift.res))):
                places.append(local_constants(G, Place(int(p))))
        else:
            aggregated = True
    return ErrorBudget(
        N, d, C1, C2, log_abs(C2), h, log_res, c8p, c8, c9p, c9d, c9,
        B_upper, B_lower, B_refined, sharp_upper, sharp_lower, tuple(places), aggregated,
    )


# ---------------------------------------------------------------------------
# canonical heights


@dataclass(frozen=True)
class IterateRecord:
    k: int
    raw: float
    lo: float
    hi: float
    mahler_lo: float
    mahler_hi: float
    degree: int
    factors: int
    coefficient_bits: int


@dataclass(frozen=True)
class DivisorHeightReport:
    naive_height: HeightInterval
    canonical_height: HeightInterval
    degree: int
    iterates: tuple[IterateRecord, ...]
    budget: ErrorBudget
    consistent_with_pcf: bool | None = None

    @property
    def raw_estimate(self) -> float:
        return self.canonical_height.raw_estimate


def _tails(budget: ErrorBudget, kind: str, degree: int, k: int) -> tuple[Interval, Interval]:
    shrink = Fraction(degree, budget.d**k)
    if kind == "sharp-local":
        return budget.sharp_lower * shrink, budget.sharp_upper * shrink
    if kind == "refined-c8c9":
        return budget.B_lower * shrink, budget.B_upper * shrink
    if kind == "coarse-Theorem1":
        tail = Interval.point(budget.coarse_bound(1)) * shrink
        return tail, tail
    raise ValueError(f"unknown budget {kind!r}")


BUDGETS = {"sharp": "sharp-local", "refined": "refined-c8c9", "coarse": "coarse-Theorem1"}


# the raw sequence is followed past the certified depth until it settles
RAW_TOL = 1e-12
RAW_MAX_K = {1: 14}


def _raw_settled(records: list, N: int) -> bool:
    if records[-1].k >= RAW_MAX_K.get(N, 0):
        return True
    return len(records) >= 2 and abs(records[-1].raw - records[-2].raw) < RAW_TOL


def canonical_height_divisor(
    F: PolyMap,
    phi: HomogeneousForm,
    eps: float = 0.5,
    max_k: int | None = None,
    budget: str = "sharp",
    factor: bool = True,
    min_k: int = 0,
) -> DivisorHeightReport:
    """Certified enclosure of the canonical height of the divisor phi = 0.

    Iterates phi_k = G_*^k phi up to scalars; ``min_k`` forces extra steps so
    the raw sequence can be inspected beyond the stopping point.
    """
    if phi.is_zero():
        raise ValueError("zero form does not define a divisor")
    kind = BUDGETS.get(budget, budget)
    if kind not in BUDGETS.values():
        raise ValueError(f"unknown budget {budget!r}")
    lift = lift_of(F)
    max_k = default_max_k(F.N) if max_k is None else max_k
    eb = error_budget(F)
    orbit = FormOrbit(lift.G, lift.res, phi, factor=factor)
    records = []
    best = None
    while True:
        m = orbit.mahler()
        lo_t, hi_t = _tails(eb, kind, phi.degree, orbit.k)
        enc = Interval((m - lo_t).lo, (m + hi_t).hi)
        records.append(
            IterateRecord(
                orbit.k, orbit.mahler_raw(), enc.lo, enc.hi, m.lo, m.hi,
                orbit.current_degree, len(orbit.factors), orbit.coefficient_bits(),
            )
        )
        done = enc.width <= eps
        if best is None and (done or orbit.k >= max_k):
            best = (enc, orbit.k, done)
        if best is not None and orbit.k >= min_k and _raw_settled(records, F.N):
            break
        if orbit.k >= max(max_k, min_k):
            break
        orbit.step()
    enc, k_used, converged = best
    height = HeightInterval(enc.lo, enc.hi, k_used, kind, converged, records[-1].raw, eps)
    return DivisorHeightReport(philippon_height(phi), height, phi.degree, tuple(records), eb)


def canonical_height_point(
    F: PolyMap,
    P: Sequence,
    eps: float = 0.5,
    max_k: int | None = None,
    budget: str = "sharp",
    min_k: int = 0,
) -> HeightInterval:
    """Certified enclosure of the Call-Silverman canonical height of P.

    Per step, h(G(R)) - d h(R) lies in [log||G|| - c3 - lambda - log|Res G|,
    log||G|| + c4] because gcd(G(R)) divides Res(G) for coprime R.
    """
    kind = BUDGETS.get(budget, budget)
    if kind not in BUDGETS.values():
        raise ValueError(f"unknown budget {budget!r}")
    lift = lift_of(F)
    d = lift.d
    max_k = default_max_k(lift.N) if max_k is None else max_k
    if kind == "coarse-Theorem1":
        raise ValueError("the coarse budget applies to divisors only")
    consts = local_constants(lift.G, INFINITY, sharp=kind == "sharp-local")
    base = consts.log_sup_F.enclosure
    low_const = base - consts.c3_eff - consts.lambda_hom.enclosure - log_abs(lift.res)
    high_const = base + consts.c4_eff
    orbit = PointOrbit(lift.G, P)
    result = None
    while True:
        h_k = orbit.log_norm(INFINITY)
        s = Fraction(1, (d - 1) * d**orbit.k)
        enc = Interval((h_k + low_const * s).lo, (h_k + high_const * s).hi)
        done = enc.width <= eps
        if result is None and (done or orbit.k >= max_k):
            result = (enc, orbit.k, done)
        if (result is not None and orbit.k >= min_k) or orbit.k >= max_k:
            break
        orbit.step()
    enc, k_used, done = result
    raw = raw_global_height(lift, P)
    if raw is None:
        raw = h_k.mid
    return HeightInterval(enc.lo, enc.hi, k_used, kind, done, raw, eps)


def critical_height(F: PolyMap, eps: float = 0.5, max_k: int | None = None, budget: str = "sharp", min_k: int = 0) -> DivisorHeightReport:
    """Canonical height of the critical divisor J_F = det(DF) = 0."""
    J = jacobian_form(F)
    rep = canonical_height_divisor(F, J, eps, max_k, budget, min_k=min_k)
    contains_zero = rep.canonical_height.lo <= 0 <= rep.canonical_height.hi
    return DivisorHeightReport(rep.naive_height, rep.canonical_height, rep.degree, rep.iterates, rep.budget, contains_zero)


# ---------------------------------------------------------------------------
# audit


class Theorem1Violation(AssertionError):
    pass


@dataclass(frozen=True)
class Theorem1Report:
    passed: bool
    coarse_ok: bool
    refined_upper_ok: bool
    refined_lower_ok: bool
    diff_upper: float  # certified upper bound on h_hat - h
    diff_lower: float  # certified upper bound on h - h_hat
    coarse_bound: Fraction
    refined_upper_bound: float
    refined_lower_bound: float
    report: DivisorHeightReport


def theorem1_check(F: PolyMap, phi: HomogeneousForm, eps: float = 0.5, max_k: int | None = None, strict: bool = True, report: DivisorHeightReport | None = None) -> Theorem1Report:
    """Check |h_hat(D) - h(D)| <= (C1 h(f) + C2) deg D and the two refined
    one-sided bounds, using certified enclosures on both sides."""
    rep = report or canonical_height_divisor(F, phi, eps, max_k)
    hh, naive, b = rep.canonical_height, rep.naive_height, rep.budget
    deg = phi.degree
    up = (Interval.point(hh.hi) - Interval.point(naive.lo)).hi
    down = (Interval.point(naive.hi) - Interval.point(hh.lo)).hi
    coarse = b.coarse_bound(deg)
    coarse_ok = Fraction(max(up, down, 0.0)) <= coarse
    ru = (b.B_upper * deg).lo
    rl = (b.B_lower * deg).lo
    out = Theorem1Report(coarse_ok and up <= ru and down <= rl, coarse_ok, up <= ru, down <= rl, up, down, coarse, ru, rl, rep)
    if strict and not out.passed:
        raise Theorem1Violation(f"height bound violated: {out}")
    return out
