"""Exact homogeneous forms and polynomial maps over the rationals.

Forms are sparse maps from exponent vectors to nonzero ``Fraction``
coefficients.  Monomials are ordered graded-lexicographically with
X0 > X1 > ... > XN; within one degree this is plain lex order on the
exponent tuples, so ``sorted(..., reverse=True)`` gives the canonical order.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


class DegreeMismatch(ValueError):
    pass


class ParseError(ValueError):
    """Malformed polynomial text; ``column`` is 1-based."""

    def __init__(self, message: str, text: str = "", column: int = 0, line: int = 1):
        self.text = text
        self.column = column
        self.line = line
        where = f"line {line}, column {column}: " if column else ""
        super().__init__(where + message)


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def monomials(num_vars: int, degree: int) -> list[Exponent]:
    """All exponent vectors of the given degree, in descending graded-lex order."""
    if num_vars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(num_vars - 1, degree - first):
            out.append((first,) + rest)
    return out


class HomogeneousForm:
    __slots__ = ("num_vars", "degree", "_terms", "_hash")

    def __init__(self, num_vars: int, degree: int, terms: Mapping[Exponent, object] = ()):
        if num_vars < 1:
            raise ValueError("need at least one variable")
        if degree < 0:
            raise ValueError("degree must be non-negative")
        clean: dict[Exponent, Fraction] = {}
        for exp, c in dict(terms).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != num_vars:
                raise DegreeMismatch(f"exponent {exp} has wrong length for {num_vars} variables")
            if min(exp) < 0 or sum(exp) != degree:
                raise DegreeMismatch(f"exponent {exp} is not of degree {degree}")
            c = _frac(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self.num_vars = num_vars
        self.degree = degree
        self._terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, num_vars: int, degree: int) -> "HomogeneousForm":
        return cls(num_vars, degree)

    @classmethod
    def constant(cls, num_vars: int, c) -> "HomogeneousForm":
        return cls(num_vars, 0, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, num_vars: int, i: int) -> "HomogeneousForm":
        exp = [0] * num_vars
        exp[i] = 1
        return cls(num_vars, 1, {tuple(exp): 1})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> "HomogeneousForm":
        exp = tuple(exp)
        return cls(len(exp), sum(exp), {exp: c})

    @classmethod
    def _trusted(cls, num_vars: int, degree: int, terms: dict) -> "HomogeneousForm":
        obj = object.__new__(cls)
        obj.num_vars = num_vars
        obj.degree = degree
        obj._terms = terms
        obj._hash = None
        return obj

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in canonical (descending graded-lex) order."""
        return sorted(self._terms.items(), reverse=True)

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __len__(self) -> int:
        return len(self._terms)

    def leading_term(self) -> tuple[Exponent, Fraction]:
        if not self._terms:
            raise ValueError("zero form has no leading term")
        exp = max(self._terms)
        return exp, self._terms[exp]

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self._terms.values())

    def integer_coefficients(self) -> list[int]:
        if not self.is_integral():
            raise ValueError("form has non-integral coefficients")
        return [c.numerator for c in self._terms.values()]

    def sup_norm(self) -> Fraction:
        return max((abs(c) for c in self._terms.values()), default=Fraction(0))

    def l1_norm(self) -> Fraction:
        return sum((abs(c) for c in self._terms.values()), Fraction(0))

    # -- ring operations ----------------------------------------------
    def _check_vars(self, other: "HomogeneousForm"):
        if self.num_vars != other.num_vars:
            raise DegreeMismatch(f"variable count mismatch: {self.num_vars} vs {other.num_vars}")

    def __add__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        self._check_vars(other)
        if self.is_zero() and other.is_zero():
            return self
        if self.degree != other.degree:
            raise DegreeMismatch(f"degree mismatch: {self.degree} vs {other.degree}")
        out = dict(self._terms)
        for exp, c in other._terms.items():
            s = out.get(exp, 0) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return HomogeneousForm._trusted(self.num_vars, self.degree, out)

    def __neg__(self) -> "HomogeneousForm":
        return HomogeneousForm._trusted(
            self.num_vars, self.degree, {e: -c for e, c in self._terms.items()}
        )

    def __sub__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "HomogeneousForm":
        c = _frac(c)
        if not c:
            return HomogeneousForm.zero(self.num_vars, self.degree)
        return HomogeneousForm._trusted(
            self.num_vars, self.degree, {e: v * c for e, v in self._terms.items()}
        )

    def __mul__(self, other) -> "HomogeneousForm":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        self._check_vars(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return HomogeneousForm._trusted(self.num_vars, self.degree + other.degree, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "HomogeneousForm":
        if n < 0:
            raise ValueError("negative power")
        result = HomogeneousForm.constant(self.num_vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        if self.num_vars != other.num_vars:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num_vars, self.degree, frozenset(self._terms.items())))
        return self._hash

    # -- evaluation / calculus ----------------------------------------
    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence) -> Fraction:
        """Exact value at a point with rational (or integer) coordinates."""
        if len(point) != self.num_vars:
            raise DegreeMismatch(f"expected {self.num_vars} coordinates, got {len(point)}")
        pt = [_frac(x) for x in point]
        total = Fraction(0)
        for exp, c in self._terms.items():
            v = c
            for x, e in zip(pt, exp):
                if e:
                    v *= x**e
            total += v
        return total

    def evaluate_generic(self, point: Sequence):
        """Evaluate with arbitrary numeric coordinates (complex, mpf, ...)."""
        total = 0
        for exp, c in self._terms.items():
            v = c.numerator if c.denominator == 1 else c.numerator / c.denominator
            for x, e in zip(point, exp):
                if e:
                    v = v * x**e
            total = total + v
        return total

    def derivative(self, i: int) -> "HomogeneousForm":
        out = {}
        for exp, c in self._terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                out[tuple(e)] = c * exp[i]
        return HomogeneousForm._trusted(self.num_vars, max(self.degree - 1, 0), out)

    def compose(self, components: Sequence["HomogeneousForm"]) -> "HomogeneousForm":
        """Substitute ``components[i]`` for ``Xi``; all components share one degree."""
        if len(components) != self.num_vars:
            raise DegreeMismatch("need one component per variable")
        nv = components[0].num_vars
        cdeg = components[0].degree
        if any(c.num_vars != nv or c.degree != cdeg for c in components):
            raise DegreeMismatch("components must share variable count and degree")
        # powers of each component are shared between terms
        cache: dict[tuple[int, int], HomogeneousForm] = {}

        def power(i: int, e: int) -> HomogeneousForm:
            key = (i, e)
            if key not in cache:
                cache[key] = components[i] if e == 1 else power(i, e - 1) * components[i]
            return cache[key]

        total = HomogeneousForm.zero(nv, cdeg * self.degree)
        for exp, c in self._terms.items():
            term = HomogeneousForm.constant(nv, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            if not term.is_zero():
                total = total + term
        return total

    # -- content ------------------------------------------------------
    def content(self) -> Fraction:
        """Positive rational c with self/c having coprime integer coefficients."""
        if self.is_zero():
            raise ValueError("zero form has no content")
        den = reduce(math.lcm, (c.denominator for c in self._terms.values()), 1)
        num = reduce(math.gcd, ((c * den).numerator for c in self._terms.values()), 0)
        return Fraction(abs(num), den)

    # -- text ---------------------------------------------------------
    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for exp, c in self.items():
            mono = "*".join(
                f"X{i}" if e == 1 else f"X{i}^{e}" for i, e in enumerate(exp) if e
            )
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono and a == 1:
                body = mono
            elif mono:
                body = f"{a}*{mono}"
            else:
                body = str(a)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"HomogeneousForm({self.num_vars}, {self.degree}, '{self}')"


@dataclass(frozen=True)
class PrimitiveForm:
    """``scalar * form`` reproduces the original; ``form`` has coprime integer
    coefficients and a positive leading (graded-lex first) coefficient."""

    form: HomogeneousForm
    scalar: Fraction

    def reconstruct(self) -> HomogeneousForm:
        return self.form.scale(self.scalar)


def add(a: HomogeneousForm, b: HomogeneousForm) -> HomogeneousForm:
    return a + b


def mul(a: HomogeneousForm, b: HomogeneousForm) -> HomogeneousForm:
    return a * b


def primitive_part(phi: HomogeneousForm) -> PrimitiveForm:
    if phi.is_zero():
        raise ValueError("zero form has no primitive part")
    c = phi.content()
    if phi.leading_term()[1] < 0:
        c = -c
    return PrimitiveForm(phi.scale(1 / c), c)


def evaluate(phi: HomogeneousForm, point: Sequence) -> Fraction:
    return phi.evaluate(point)


class PolyMap:
    """Lift F = (F0, ..., FN) of an endomorphism of projective N-space."""

    __slots__ = ("components", "N", "d")

    def __init__(self, components: Sequence[HomogeneousForm]):
        components = tuple(components)
        if len(components) < 2:
            raise ValueError("a map needs at least two components")
        nv = len(components)
        degs = {c.degree for c in components if not c.is_zero()}
        if any(c.num_vars != nv for c in components):
            raise DegreeMismatch(f"every component needs {nv} variables")
        if len(degs) > 1:
            raise DegreeMismatch(f"components have different degrees {sorted(degs)}")
        if not degs:
            raise ValueError("all components are zero")
        d = degs.pop()
        if d < 1:
            raise ValueError("map degree must be at least 1")
        # zero components are stored with the common degree
        self.components = tuple(
            HomogeneousForm.zero(nv, d) if c.is_zero() else c for c in components
        )
        self.N = nv - 1
        self.d = d

    @property
    def num_vars(self) -> int:
        return self.N + 1

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> HomogeneousForm:
        return self.components[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyMap) and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __call__(self, point: Sequence) -> tuple[Fraction, ...]:
        return tuple(c.evaluate(point) for c in self.components)

    def apply_int(self, point: Sequence[int]) -> tuple[int, ...]:
        """F(point) for an integral map and integer point, staying in ``int``."""
        out = []
        for comp in self.components:
            total = 0
            for exp, c in comp._terms.items():
                v = c.numerator
                for x, e in zip(point, exp):
                    if e:
                        v *= x**e
                total += v
            out.append(total)
        return tuple(out)

    def scale(self, alpha) -> "PolyMap":
        return PolyMap([c.scale(alpha) for c in self.components])

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """(self o inner) = self(inner(X))."""
        return PolyMap([c.compose(inner.components) for c in self.components])

    def coefficients(self) -> list[Fraction]:
        return [c for comp in self.components for c in comp._terms.values()]

    def is_integral(self) -> bool:
        return all(c.is_integral() for c in self.components)

    def sup_norm(self) -> Fraction:
        return max(abs(c) for c in self.coefficients())

    def content(self) -> Fraction:
        coeffs = self.coefficients()
        den = reduce(math.lcm, (c.denominator for c in coeffs), 1)
        num = reduce(math.gcd, ((c * den).numerator for c in coeffs), 0)
        return Fraction(num, den)

    def primitive_lift(self) -> tuple["PolyMap", Fraction]:
        """(G, c) with self = c*G and G integral with coprime coefficients."""
        c = self.content()
        return self.scale(1 / c), c

    def __str__(self) -> str:
        return ", ".join(str(c) for c in self.components)

    def __repr__(self) -> str:
        return f"PolyMap([{self}])"


def pull_back(F: PolyMap, phi: HomogeneousForm) -> HomogeneousForm:
    if phi.num_vars != F.num_vars:
        raise DegreeMismatch(f"form has {phi.num_vars} variables, map acts on {F.num_vars}")
    return phi.compose(F.components)


def _det_forms(rows: list[list[HomogeneousForm]]) -> HomogeneousForm:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det_forms(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        nv = rows[0][0].num_vars
        return HomogeneousForm.zero(nv, 0)
    return total


def jacobian_form(F: PolyMap) -> HomogeneousForm:
    """det(dF_i/dX_j), of degree (N+1)(d-1)."""
    rows = [[comp.derivative(j) for j in range(F.num_vars)] for comp in F.components]
    # derivatives of degree-1 forms are constants; keep degrees uniform
    J = _det_forms(rows)
    if J.is_zero():
        raise ValueError("Jacobian determinant vanishes identically; critical divisor undefined")
    return J


# -- text grammar -------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>X(?P<idx>\d+)(?:\^(?P<exp>\d+))?)|(?P<op>[+\-*]))")


def parse_form(text: str, num_vars: int, line: int = 1) -> HomogeneousForm:
    """Parse e.g. ``3*X0^2*X1 - 1/2*X2^3`` into a form in ``num_vars`` variables."""
    pos = 0
    terms: list[tuple[Fraction, list[int], int]] = []
    sign = 1
    coeff: Fraction | None = None
    exp = [0] * num_vars
    expect_factor = True
    started = False
    term_col = 1

    def flush(col: int):
        nonlocal coeff, exp, sign, started
        if not started:
            raise ParseError("empty term", text, col, line)
        c = coeff if coeff is not None else Fraction(1)
        terms.append((sign * c, exp, col))
        coeff, exp, sign, started = None, [0] * num_vars, 1, False

    stripped = text.strip()
    if not stripped:
        raise ParseError("empty polynomial", text, 1, line)
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", text, col, line)
        col = m.start() + 1 + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("num") is not None:
            if not expect_factor or coeff is not None or any(exp):
                raise ParseError("coefficient must come first in a term", text, col, line)
            coeff = Fraction(m.group("num"))
            if coeff.denominator == 0:
                raise ParseError("zero denominator", text, col, line)
            started = True
            expect_factor = False
        elif m.group("var") is not None:
            if not expect_factor and started and coeff is None:
                raise ParseError("missing '*' between factors", text, col, line)
            i = int(m.group("idx"))
            if i >= num_vars:
                raise ParseError(f"variable X{i} out of range X0..X{num_vars - 1}", text, col, line)
            exp[i] += int(m.group("exp") or 1)
            started = True
            expect_factor = False
        else:
            op = m.group("op")
            if op == "*":
                if expect_factor:
                    raise ParseError("dangling '*'", text, col, line)
                expect_factor = True
            else:
                if started:
                    if expect_factor:
                        raise ParseError(f"'{op}' after '*'", text, col, line)
                    flush(term_col)
                elif terms or sign != 1:
                    raise ParseError(f"unexpected '{op}'", text, col, line)
                sign = -1 if op == "-" else 1
                term_col = col
                expect_factor = True
        pos = m.end()
    if expect_factor and started:
        raise ParseError("polynomial ends with an operator", text, len(text), line)
    if not started:
        raise ParseError("polynomial ends with an operator", text, len(text), line)
    flush(term_col)
    degrees = {sum(e) for _, e, _ in terms}
    if len(degrees) > 1:
        deg0 = sum(terms[0][1])
        bad = next(t for t in terms if sum(t[1]) != deg0)
        raise ParseError(f"form is not homogeneous (degrees {sorted(degrees)})", text, bad[2], line)
    return HomogeneousForm(num_vars, degrees.pop(), _sum_terms(terms))


def _sum_terms(terms) -> dict:
    out: dict = {}
    for c, e, _ in terms:
        k = tuple(e)
        out[k] = out.get(k, 0) + c
    return out


def parse_map(text: str | Iterable[str], num_vars: int | None = None) -> PolyMap:
    """Comma-separated components (or an iterable of component strings)."""
    parts = [p for p in (text.split(",") if isinstance(text, str) else list(text))]
    parts = [p for p in parts if p.strip()]
    nv = num_vars if num_vars is not None else len(parts)
    if len(parts) != nv:
        raise ParseError(f"expected {nv} components, got {len(parts)}", str(text), 1)
    return PolyMap([parse_form(p, nv, line=i + 1) for i, p in enumerate(parts)])


def parse_point(text: str) -> tuple[Fraction, ...]:
    """``2,1`` or ``(2:1)`` or ``1/2, 3``."""
    body = text.strip().strip("()[]")
    sep = ":" if ":" in body else ","
    try:
        return tuple(Fraction(p.strip()) for p in body.split(sep))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad point {text!r}: {exc}", text, 1) from None


def coprime_integer_point(point: Sequence) -> tuple[tuple[int, ...], Fraction]:
    """(R, s) with point = s*R, R coprime integers, first nonzero entry of R positive."""
    pt = [_frac(x) for x in point]
    if not any(pt):
        raise ValueError("the zero vector is not a point")
    den = reduce(math.lcm, (x.denominator for x in pt), 1)
    ints = [(x * den).numerator for x in pt]
    g = reduce(math.gcd, ints, 0)
    first = next(x for x in ints if x)
    if first < 0:
        g = -g
    return tuple(x // g for x in ints), Fraction(g, den)


def random_form(rng, num_vars: int, degree: int, max_terms: int = 3, coeff_range: int = 3) -> HomogeneousForm:
    """Sparse random integer form, never zero."""
    monos = monomials(num_vars, degree)
    while True:
        k = rng.randint(1, min(max_terms, len(monos)))
        chosen = rng.sample(monos, k)
        f = HomogeneousForm(
            num_vars, degree, {m: rng.choice([c for c in range(-coeff_range, coeff_range + 1) if c]) for m in chosen}
        )
        if not f.is_zero():
            return f


def all_exponents_upto(num_vars: int, degree: int) -> Iterable[Exponent]:
    return itertools.chain.from_iterable(monomials(num_vars, k) for k in range(degree + 1))


def factor_form(phi: HomogeneousForm) -> tuple[Fraction, list[tuple[HomogeneousForm, int]]]:
    """phi = scalar * prod B_i^n_i with B_i irreducible primitive integer forms
    (positive leading coefficient), factored over Q."""
    import sympy

    if phi.is_zero():
        raise ValueError("cannot factor the zero form")
    prim = primitive_part(phi)
    if prim.form.degree == 0:
        return prim.scalar, []
    gens = sympy.symbols(f"X0:{phi.num_vars}")
    poly = sympy.Poly.from_dict({e: int(c) for e, c in prim.form.terms.items()}, *gens, domain="ZZ")
    coeff, factors = poly.factor_list()
    scalar = prim.scalar * Fraction(int(coeff))
    out = []
    for f, n in factors:
        terms = {tuple(m): int(c) for m, c in f.terms()}
        form = HomogeneousForm(phi.num_vars, sum(next(iter(terms))), terms)
        p = primitive_part(form)
        scalar *= p.scalar**n
        out.append((p.form, int(n)))
    return scalar, out
