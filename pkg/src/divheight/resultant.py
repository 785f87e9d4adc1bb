"""Macaulay resultants and pushforwards of forms.

The pushforward of a form under a morphism lift F is obtained from the
eliminant R(F, phi)(Y) = Res_X(F_0 - X_{N+1}^d Y_0, ..., F_N - X_{N+1}^d Y_N, phi),
which equals Res(F)^deg(phi) * F_* phi.  R is recovered by evaluating integer
resultants on a lattice of Y values and interpolating.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence

from .linalg import integer_det
from .poly import Exponent, HomogeneousForm, PolyMap, monomials, primitive_part


class NotAMorphism(ValueError):
    """Res(F) = 0: the forms share a nontrivial common zero."""


class EliminationError(ArithmeticError):
    """Exact division that must succeed did not; indicates an internal bug."""


# ---------------------------------------------------------------------------
# Macaulay matrix


@dataclass(frozen=True)
class MacaulayLayout:
    degrees: tuple[int, ...]
    t: int
    columns: tuple[Exponent, ...]
    blocks: tuple[tuple[Exponent, ...], ...]
    # per column: (block i, multiplier monomial m / X_i^{d_i})
    rows: tuple[tuple[int, Exponent], ...]
    nonreduced: tuple[int, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.columns)


@lru_cache(maxsize=256)
def macaulay_layout(degrees: tuple[int, ...]) -> MacaulayLayout:
    """Monomial partition M_0..M_n of degree-t monomials, t = sum(d_i - 1) + 1."""
    n = len(degrees)
    t = sum(d - 1 for d in degrees) + 1
    columns = tuple(monomials(n, t))
    blocks: list[list[Exponent]] = [[] for _ in range(n)]
    rows = []
    nonreduced = []
    for idx, m in enumerate(columns):
        divisible = [j for j in range(n) if m[j] >= degrees[j]]
        i = divisible[0]
        blocks[i].append(m)
        mult = list(m)
        mult[i] -= degrees[i]
        rows.append((i, tuple(mult)))
        if len(divisible) > 1:
            nonreduced.append(idx)
    return MacaulayLayout(
        tuple(degrees), t, columns, tuple(tuple(b) for b in blocks), tuple(rows), tuple(nonreduced)
    )


def _int_terms(form: HomogeneousForm) -> list[tuple[Exponent, int]]:
    return [(e, c.numerator) for e, c in form.terms.items()]


def macaulay_matrix(forms: Sequence[HomogeneousForm], layout: MacaulayLayout | None = None) -> list[list[int]]:
    if layout is None:
        layout = macaulay_layout(tuple(f.degree for f in forms))
    index = {m: k for k, m in enumerate(layout.columns)}
    terms = [_int_terms(f) for f in forms]
    size = layout.size
    matrix = []
    for i, mult in layout.rows:
        row = [0] * size
        for e, c in terms[i]:
            row[index[tuple(a + b for a, b in zip(e, mult))]] = c
        matrix.append(row)
    return matrix


def _submatrix(matrix: list[list[int]], idx: Sequence[int]) -> list[list[int]]:
    return [[matrix[r][c] for c in idx] for r in idx]


def _macaulay_quotient(forms: Sequence[HomogeneousForm], layout: MacaulayLayout) -> tuple[int, int]:
    matrix = macaulay_matrix(forms, layout)
    extraneous = integer_det(_submatrix(matrix, layout.nonreduced)) if layout.nonreduced else 1
    if extraneous == 0:
        return 0, 0
    return integer_det(matrix), extraneous


def _lagrange_at_zero(points: list[int], values: list[int]) -> Fraction:
    total = Fraction(0)
    for i, (xi, yi) in enumerate(zip(points, values)):
        w = Fraction(yi)
        for j, xj in enumerate(points):
            if j != i:
                w *= Fraction(-xj, xi - xj)
        total += w
    return total


UNIMODULAR_TRIES = 4


def _unimodular(n: int, seed: int) -> list[list[int]]:
    """Deterministic L*U with unit diagonals and small entries (det = 1)."""
    rng = random.Random(seed)
    L = [[1 if i == j else (rng.randint(-2, 2) if i > j else 0) for j in range(n)] for i in range(n)]
    U = [[1 if i == j else (rng.randint(-2, 2) if i < j else 0) for j in range(n)] for i in range(n)]
    return [[sum(L[i][k] * U[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _linear_forms(A: list[list[int]]) -> list[HomogeneousForm]:
    n = len(A)
    return [HomogeneousForm(n, 1, {tuple(int(j == k) for k in range(n)): c for j, c in enumerate(row) if c}) for row in A]


def resultant_of_forms(forms: Sequence[HomogeneousForm]) -> int:
    """Macaulay resultant of n integral forms in n variables (mixed degrees allowed).

    Normalized so that Res(X_0^{d_0}, ..., X_{n-1}^{d_{n-1}}) = 1.
    """
    n = len(forms)
    if any(f.num_vars != n for f in forms):
        raise ValueError(f"need {n} forms in {n} variables")
    if not all(f.is_integral() for f in forms):
        raise ValueError("resultant_of_forms expects integral forms")
    degrees = tuple(f.degree for f in forms)
    if any(d < 1 for d in degrees):
        raise ValueError("forms must have positive degree")
    if any(f.is_zero() for f in forms):
        return 0
    layout = macaulay_layout(degrees)
    delta, extraneous = _macaulay_quotient(forms, layout)
    if extraneous:
        q, r = divmod(delta, extraneous)
        if r:
            raise EliminationError("Macaulay extraneous factor does not divide the determinant")
        return q
    # extraneous minor vanished: Res(F o A) = det(A)^(prod d_i) Res(F), so a
    # unimodular change of variables usually breaks the degenerate sparsity
    for seed in range(UNIMODULAR_TRIES):
        lin = _linear_forms(_unimodular(n, seed))
        moved = [f.compose(lin) for f in forms]
        delta, extraneous = _macaulay_quotient(moved, layout)
        if extraneous:
            q, r = divmod(delta, extraneous)
            if r:
                raise EliminationError("Macaulay extraneous factor does not divide the determinant")
            return q
    # last resort: interpolate Res(F + u X^d) in u at u = 0
    total_degree = sum(math.prod(degrees) // d for d in degrees)
    powers = [HomogeneousForm.monomial(tuple(dj if j == i else 0 for j in range(n))) for i, dj in enumerate(degrees)]
    pts: list[int] = []
    vals: list[int] = []
    u = 0
    while len(pts) < total_degree + 1:
        u += 1
        shifted = [f + p.scale(u) for f, p in zip(forms, powers)]
        delta, extraneous = _macaulay_quotient(shifted, layout)
        if not extraneous:
            continue
        q, r = divmod(delta, extraneous)
        if r:
            raise EliminationError("Macaulay extraneous factor does not divide the determinant")
        pts.append(u)
        vals.append(q)
    value = _lagrange_at_zero(pts, vals)
    if value.denominator != 1:
        raise EliminationError("interpolated resultant is not an integer")
    return value.numerator


def _clear_denominators(form: HomogeneousForm) -> tuple[HomogeneousForm, int]:
    den = reduce(math.lcm, (c.denominator for c in form.terms.values()), 1)
    return form.scale(den), den


def macaulay_resultant(F: PolyMap) -> Fraction:
    """Res(F) for a lift with rational coefficients; zero iff F is not a morphism."""
    cleared = [_clear_denominators(c) for c in F.components]
    value = resultant_of_forms([f for f, _ in cleared])
    # homogeneous of degree d^N in the coefficients of each component
    scale = math.prod(den for _, den in cleared) ** (F.d**F.N)
    return Fraction(value, scale)


# ---------------------------------------------------------------------------
# binary forms


def binary_coeffs(form: HomogeneousForm) -> list[Fraction]:
    """Coefficients of X0^e, X0^(e-1) X1, ..., X1^e."""
    e = form.degree
    return [form.coefficient((e - i, i)) for i in range(e + 1)]


def binary_form(coeffs: Sequence) -> HomogeneousForm:
    e = len(coeffs) - 1
    return HomogeneousForm(2, e, {(e - i, i): c for i, c in enumerate(coeffs)})


def sylvester_matrix(a: Sequence, b: Sequence) -> list[list]:
    """Sylvester matrix of coefficient lists (highest first, formal degrees len-1)."""
    da, db = len(a) - 1, len(b) - 1
    size = da + db
    rows = []
    for i in range(db):
        rows.append([0] * i + list(a) + [0] * (size - da - 1 - i))
    for i in range(da):
        rows.append([0] * i + list(b) + [0] * (size - db - 1 - i))
    return rows


def _det_fraction(rows: list[list]) -> Fraction:
    den = reduce(math.lcm, (Fraction(x).denominator for r in rows for x in r), 1)
    ints = [[(Fraction(x) * den).numerator for x in r] for r in rows]
    return Fraction(integer_det(ints), den ** len(rows))


def sylvester_resultant(a: HomogeneousForm, b: HomogeneousForm) -> Fraction:
    """Res of two binary forms via the Sylvester determinant."""
    if a.num_vars != 2 or b.num_vars != 2:
        raise ValueError("Sylvester resultant needs binary forms")
    return _det_fraction(sylvester_matrix(binary_coeffs(a), binary_coeffs(b)))


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Remainder of a by b (coefficients highest first, b[0] != 0)."""
    r = list(a)
    lb = b[0]
    db = len(b) - 1
    for i in range(len(r) - db):
        c = r[i]
        if c:
            q = c / lb
            for j in range(1, db + 1):
                r[i + j] -= q * b[j]
        r[i] = Fraction(0)
    return r[len(r) - db:] if db else []


def binary_resultant_reduced(a: Sequence, b: Sequence) -> Fraction:
    """Res_{deg a, deg b}(a, b) for coefficient lists, assuming b[0] != 0.

    Uses Res(a, b) = (-1)^{ab} lc(b)^{a-b+1} Res_{b,b-1}(b, a mod b), which is
    cheap when deg b is small.
    """
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    da, db = len(a) - 1, len(b) - 1
    if b[0] == 0:
        raise ValueError("leading coefficient of the second argument must be nonzero")
    if db == 0:
        return b[0] ** da
    rem = _poly_rem(a, b) if da >= db else [Fraction(0)] * (db - 1 - da) + a
    small = _det_fraction(sylvester_matrix(b, rem))
    sign = -1 if (da * db) % 2 else 1
    return sign * b[0] ** (da - db + 1) * small


# ---------------------------------------------------------------------------
# lattice interpolation


def _lattice(num_free: int, degree: int) -> list[tuple[int, ...]]:
    """Points a in Z_{>=0}^num_free with |a| <= degree."""
    return [m[1:] for m in monomials(num_free + 1, degree)]


@lru_cache(maxsize=None)
def _stirling1(n: int) -> tuple[tuple[int, ...], ...]:
    """Signed Stirling numbers of the first kind s(k, j) for k <= n."""
    table = [[1]]
    for k in range(1, n + 1):
        prev = table[-1]
        row = [0] * (k + 1)
        for j in range(1, k + 1):
            row[j] = (prev[j - 1] if j - 1 < len(prev) else 0) - (k - 1) * (prev[j] if j < len(prev) else 0)
        table.append(row)
    return tuple(tuple(r) for r in table)


def interpolate_lattice(values: dict[tuple[int, ...], Fraction], degree: int, num_free: int) -> dict[tuple[int, ...], Fraction]:
    """Polynomial of total degree <= ``degree`` in ``num_free`` variables from its
    values on the principal lattice; returns {exponent: coefficient}.

    Multivariate forward differences give coefficients in the falling-factorial
    basis, which are then expanded with Stirling numbers.
    """
    table = dict(values)
    for axis in range(num_free):
        # forward differences along ``axis`` for every line parallel to it
        lines: dict[tuple, list[tuple[int, ...]]] = {}
        for a in table:
            key = a[:axis] + a[axis + 1:]
            lines.setdefault(key, []).append(a)
        new = {}
        for key, pts in lines.items():
            pts.sort(key=lambda a: a[axis])
            seq = [table[a] for a in pts]
            diffs = []
            while seq:
                diffs.append(seq[0])
                seq = [y - x for x, y in zip(seq, seq[1:])]
            for k, dv in enumerate(diffs):
                new[key[:axis] + (k,) + key[axis:]] = dv
        table = new
    stirling = _stirling1(degree)
    coeffs: dict[tuple[int, ...], Fraction] = {}
    for alpha, diff in table.items():
        if not diff:
            continue
        c = Fraction(diff, math.prod(math.factorial(k) for k in alpha))
        # expand prod_i (y_i)_{alpha_i} = prod_i sum_j s(alpha_i, j) y_i^j
        partial = {(): c}
        for ai in alpha:
            row = stirling[ai]
            nxt = {}
            for beta, v in partial.items():
                for j in range(ai + 1):
                    if row[j]:
                        nb = beta + (j,)
                        nxt[nb] = nxt.get(nb, 0) + v * row[j]
            partial = nxt
        for beta, v in partial.items():
            coeffs[beta] = coeffs.get(beta, 0) + v
    return {b: v for b, v in coeffs.items() if v}


def _shift_univariate(coeffs: dict[tuple[int], Fraction], origin: int) -> dict[tuple[int], Fraction]:
    """Given p(z) as {(k,): c}, return p(y - origin) in powers of y."""
    if origin == 0:
        return coeffs
    out: dict[tuple[int], Fraction] = {}
    for (k,), c in coeffs.items():
        for j in range(k + 1):
            v = c * math.comb(k, j) * (-origin) ** (k - j)
            out[(j,)] = out.get((j,), 0) + v
    return {b: v for b, v in out.items() if v}


# ---------------------------------------------------------------------------
# pushforward


@dataclass(frozen=True)
class PushforwardResult:
    form: HomogeneousForm
    res_power_removed: Fraction

    @property
    def raw_eliminant(self) -> HomogeneousForm:
        return self.form.scale(self.res_power_removed)


def _integral_lift(F: PolyMap) -> tuple[PolyMap, Fraction]:
    """(G, alpha) with G = alpha * F integral."""
    den = reduce(math.lcm, (c.denominator for c in F.coefficients()), 1)
    return F.scale(den), Fraction(den)


def eliminant(F: PolyMap, phi: HomogeneousForm) -> HomogeneousForm:
    """R(F, phi)(Y) for integral F and phi, by evaluation at Y = (1, a) on a lattice."""
    N, d, e = F.N, F.d, phi.degree
    nv = N + 2
    D = d**N * e
    lift = lambda f: HomogeneousForm(nv, f.degree, {ex + (0,): c for ex, c in f.terms.items()})
    base = [lift(c) for c in F.components]
    last_power = [0] * nv
    last_power[N + 1] = d
    xd = HomogeneousForm.monomial(tuple(last_power))
    phi_lift = lift(phi)
    layout = macaulay_layout(tuple([d] * (N + 1) + [e]))
    # the same unimodular change works for almost every lattice point, so the
    # composed pieces are built once and the last successful variant is tried first
    variants = [(base, xd, phi_lift)]
    seeds = iter(range(UNIMODULAR_TRIES))

    def value_at(a):
        y = (1,) + a
        order = list(range(len(variants)))
        while True:
            for idx in order:
                gs, x_d, ph = variants[idx]
                forms = [g - x_d.scale(y[i]) for i, g in enumerate(gs)] + [ph]
                delta, extraneous = _macaulay_quotient(forms, layout)
                if extraneous:
                    if idx:
                        variants.insert(0, variants.pop(idx))
                    q, r = divmod(delta, extraneous)
                    if r:
                        raise EliminationError("Macaulay extraneous factor does not divide the determinant")
                    return q
            seed = next(seeds, None)
            if seed is None:
                forms = [g - xd.scale(y[i]) for i, g in enumerate(base)] + [phi_lift]
                return resultant_of_forms(forms)
            lin = _linear_forms(_unimodular(nv, seed))
            variants.append(([g.compose(lin) for g in base], xd.compose(lin), phi_lift.compose(lin)))
            order = [len(variants) - 1]

    values = {a: Fraction(value_at(a)) for a in _lattice(N, D)}
    poly = interpolate_lattice(values, D, N)
    result = HomogeneousForm(N + 1, D, {(D - sum(beta),) + beta: c for beta, c in poly.items()})
    # one point off the lattice: catches any mismatch between degree and data
    probe = (D + 1,) + (1,) * (N - 1)
    if result.evaluate((1,) + probe) != value_at(probe):
        raise EliminationError("eliminant interpolation is inconsistent")
    return result


def _binary_eliminant(F: PolyMap, phi: HomogeneousForm) -> HomogeneousForm:
    """Res_X(phi, Y1 F0 - Y0 F1) as a binary form of degree deg(phi) in Y."""
    e = phi.degree
    f0, f1 = binary_coeffs(F[0]), binary_coeffs(F[1])
    a = binary_coeffs(phi)
    # leading coefficient of F0 - y F1 vanishes for at most one y
    origin = 0
    if f1[0] != 0:
        bad = f0[0] / f1[0]
        if bad.denominator == 1 and 0 <= bad <= e:
            origin = int(bad) + 1
    values = {}
    for k in range(e + 1):
        y = origin + k
        b = [c0 - y * c1 for c0, c1 in zip(f0, f1)]
        values[(k,)] = binary_resultant_reduced(a, b)
    poly = _shift_univariate(interpolate_lattice(values, e, 1), origin)
    # g(y) = R(y, 1) with R = sum c_i Y0^i Y1^(e-i)
    return HomogeneousForm(2, e, {(i, e - i): c for (i,), c in poly.items()})


def push_forward(F: PolyMap, phi: HomogeneousForm, method: str = "auto", res: Fraction | None = None) -> PushforwardResult:
    """Exact F_* phi of degree d^N deg(phi).

    ``method`` is ``"macaulay"`` (evaluation-interpolation of the eliminant),
    ``"binary"`` (N = 1 only; reduced binary resultants) or ``"auto"``.
    """
    if phi.is_zero():
        raise ValueError("cannot push forward the zero form")
    if phi.num_vars != F.num_vars:
        raise ValueError("form and map act on different spaces")
    if res is None:
        res = macaulay_resultant(F)
    if res == 0:
        raise NotAMorphism("Res(F) = 0; pushforward requires a morphism")
    e = phi.degree
    N, d = F.N, F.d
    if method == "auto":
        method = "binary" if N == 1 else "macaulay"
    if e == 0:
        c = phi.coefficient((0,) * F.num_vars)
        return PushforwardResult(HomogeneousForm.constant(F.num_vars, c ** (d ** (N + 1))), Fraction(1))
    # reduce to integral data: F = G / alpha, phi = c * prim
    G, alpha = _integral_lift(F)
    prim = primitive_part(phi)
    res_g = res * alpha ** ((N + 1) * d**N)
    if method == "binary":
        if N != 1:
            raise ValueError("binary pushforward is only for N = 1")
        inner = _binary_eliminant(G, prim.form)
        sign = -1 if (e * d * d) % 2 else 1
        core = (inner ** d).scale(Fraction(sign, 1) / res_g**e)
    elif method == "macaulay":
        raw = eliminant(G, prim.form)
        if any(c.denominator != 1 for c in raw.terms.values()):
            raise EliminationError("eliminant of integral data has non-integral coefficients")
        core = raw.scale(1 / res_g**e)
    else:
        raise ValueError(f"unknown method {method!r}")
    # (alpha F)_* phi = alpha^(-d^N e) F_* phi and F_*(c phi) = c^(d^(N+1)) F_* phi
    scalar = prim.scalar ** (d ** (N + 1)) * alpha ** (d**N * e)
    form = core.scale(scalar)
    return PushforwardResult(form, res**e)


def push_forward_p1(F: PolyMap, Q: Sequence, res: Fraction | None = None) -> HomogeneousForm:
    """Closed form F_* Phi_Q = Phi_{F(Q)}^d / Res(F) on P^1, Phi_Q = X1*Q0 - X0*Q1."""
    if F.N != 1:
        raise ValueError("closed form is only for N = 1")
    if not any(Q):
        raise ValueError("Q must be nonzero")
    if res is None:
        res = macaulay_resultant(F)
    if res == 0:
        raise NotAMorphism("Res(F) = 0")
    image = F(Q)
    return (phi_of_point(image) ** F.d).scale(1 / res)


def phi_of_point(Q: Sequence) -> HomogeneousForm:
    """Linear form X ^ Q = X1*Q0 - X0*Q1 vanishing at the point Q of P^1."""
    q0, q1 = (Fraction(x) for x in Q)
    return HomogeneousForm(2, 1, {(0, 1): q0, (1, 0): -q1})


def fiber_product_oracle(F: PolyMap, phi: HomogeneousForm, Y: Sequence, prec: int = 60):
    """Numerically evaluate prod_{F(X)=Y} phi(X) for N = 1 (independent check).

    Solves F(X) = Y by finding the points of P^1 with F(x) proportional to Y
    and rescaling by d-th roots.
    """
    import mpmath

    if F.N != 1:
        raise ValueError("oracle implemented for N = 1 only")
    mpmath.mp.dps = prec
    y0, y1 = (mpmath.mpf(Fraction(v).numerator) / Fraction(v).denominator for v in Y)
    d = F.d
    f0 = [mpmath.mpf(c.numerator) / c.denominator for c in binary_coeffs(F[0])]
    f1 = [mpmath.mpf(c.numerator) / c.denominator for c in binary_coeffs(F[1])]
    h = [y1 * a - y0 * b for a, b in zip(f0, f1)]  # points with F(x:1) ~ Y
    pts = [(r, mpmath.mpf(1)) for r in mpmath.polyroots(h, maxsteps=200, extraprec=2 * prec)] if h[0] != 0 else []
    if h[0] == 0:
        raise ValueError("choose Y with a finite fibre in the affine chart")
    total = mpmath.mpc(1)
    for x0, x1 in pts:
        # F(s*x) = s^d F(x) = Y  =>  s^d = Y_i / F_i(x)
        fx = [sum(c * x0 ** (d - i) * x1**i for i, c in enumerate(f)) for f in (f0, f1)]
        ratio = y0 / fx[0] if abs(fx[0]) > abs(fx[1]) else y1 / fx[1]
        for k in range(d):
            s = mpmath.root(ratio, d, k)
            total *= phi.evaluate_generic([s * x0, s * x1])
    return total


def push_forward_power(G: PolyMap, phi: HomogeneousForm, res: Fraction | None = None) -> tuple[HomogeneousForm, int, Fraction]:
    """(B, n, c) with G_* phi = c * B^n for integral G and phi.

    On P^1 the pushforward is an explicit d-th power, so B keeps the degree
    of phi; in higher dimension n = 1.
    """
    if res is None:
        res = macaulay_resultant(G)
    if res == 0:
        raise NotAMorphism("Res(F) = 0")
    e = phi.degree
    if G.N == 1:
        inner = _binary_eliminant(G, phi)
        sign = -1 if (e * G.d * G.d) % 2 else 1
        return inner, G.d, Fraction(sign) / Fraction(res) ** e
    return eliminant(G, phi), 1, 1 / Fraction(res) ** e
