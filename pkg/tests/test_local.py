import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_morphism
from divheight.intervals import Interval, log_abs
from divheight.local import (
    INFINITY,
    Place,
    form_escape_rate,
    gauss_log_norm,
    green_pairing,
    green_pairing_sum,
    lambda_hom,
    local_constants,
    lyapunov_estimate,
    mahler_bracket,
    mahler_estimate,
    closed_c1,
    closed_rs,
    point_escape_rate,
    point_estimate_check,
    valuation,
)
from divheight.poly import HomogeneousForm, parse_form, parse_map, pull_back, random_form
from divheight.resultant import phi_of_point, push_forward

SQUARE = parse_map("X0^2,X1^2")
X2_PLUS_1 = parse_map("X0^2+X1^2,X1^2")


def torus_oracle(phi: HomogeneousForm, m: int = 256) -> float:
    """Plain midpoint rule on the full torus (independent of the Jensen path)."""
    N = phi.num_vars - 1
    theta = (np.arange(m) + 0.5) * 2 * np.pi / m
    grids = np.meshgrid(*([theta] * N), indexing="ij")
    z = [np.ones_like(grids[0], dtype=complex)] + [np.exp(1j * g) for g in grids]
    total = np.zeros_like(z[0])
    for e, c in phi.items():
        term = complex(float(c))
        for zi, ei in zip(z, e):
            term = term * zi**ei
        total = total + term
    return float(np.mean(np.log(np.abs(total))))


def test_valuation_and_places():
    assert valuation(Fraction(12, 5), 2) == 2
    assert valuation(Fraction(12, 5), 5) == -1
    assert str(Place.parse("inf")) == "inf" and Place.parse("7").prime == 7
    with pytest.raises(ValueError):
        Place(6)


def test_gauss_norm_examples():
    assert gauss_log_norm(parse_form("4*X0 + 6*X1", 2), 2).exact == -1
    assert gauss_log_norm(parse_form("1/3*X0 + X1", 2), 3).exact == 1


@given(st.integers(0, 2**32), st.sampled_from([2, 3, 5]))
def test_gauss_lemma(seed, p):
    rng = random.Random(seed)
    f, g = random_form(rng, 3, 2, 3, 12), random_form(rng, 3, 1, 3, 12)
    assert gauss_log_norm(f * g, p).exact == gauss_log_norm(f, p).exact + gauss_log_norm(g, p).exact


def test_bracket_exact_cases():
    assert mahler_bracket(parse_form("X0+X1", 2)) == Interval(0.0, 0.0)
    b = mahler_bracket(parse_form("X0+2*X1", 2))
    assert b.contains(math.log(2)) and b.width < 1e-12
    assert mahler_bracket(parse_form("-7*X0^3", 2)).contains(math.log(7))


@pytest.mark.parametrize("num_vars", [2, 3])
def test_bracket_contains_independent_quadrature(rng, num_vars):
    for _ in range(6):
        phi = random_form(rng, num_vars, rng.randint(1, 3), 4, 5)
        b = mahler_bracket(phi)
        est = mahler_estimate(phi)
        assert b.contains(est.value)
        # the midpoint rule converges slowly near zeros on the torus
        assert abs(torus_oracle(phi) - est.value) < 5e-2


@given(st.integers(0, 2**32))
def test_bracket_additivity(seed):
    rng = random.Random(seed)
    f, g = random_form(rng, 2, 2, 3, 6), random_form(rng, 2, 2, 3, 6)
    assert mahler_bracket(f * g).overlaps(mahler_bracket(f) + mahler_bracket(g))


def test_constant_values():
    assert closed_rs(1, 2) == (4374, 4)
    assert abs(closed_c1(1, 2).mid - 76082.87) < 0.01
    lam = lambda_hom(parse_map("2*X0^2,X1^2"), Place(2))
    assert lam.exact == 2


def test_sharp_constants_never_exceed_closed_form():
    for F in (SQUARE, X2_PLUS_1, parse_map("X0^2-X1^2,X1^2")):
        k = local_constants(F, INFINITY)
        assert k.c3_eff.hi <= k.c3.hi and k.c4_eff.hi <= k.c4.hi
        assert k.c3_eff.lo >= 0


@pytest.mark.parametrize("sharp", [False, True])
def test_point_estimate_lemma(rng, sharp):
    for _ in range(10):
        F = random_morphism(rng, 1, 2)
        P = (Fraction(rng.randint(-50, 50), rng.randint(1, 9)), Fraction(rng.randint(-50, 50), rng.randint(1, 9)))
        if not any(P):
            continue
        for v in (INFINITY, Place(2), Place(3)):
            assert point_estimate_check(F, P, v, sharp=sharp)[0]


def test_power_map_escape_rate_is_exact():
    rate = point_escape_rate(SQUARE, (2, 1))
    assert rate.enclosure.contains(math.log(2)) and rate.width < 1e-12
    assert point_escape_rate(SQUARE, (2, 1), Place(2)).exact == (0, 0)


def test_point_escape_rate_functorial():
    P = (Fraction(1, 3), Fraction(1))
    a = point_escape_rate(X2_PLUS_1, P, eps=1e-3)
    b = point_escape_rate(X2_PLUS_1, X2_PLUS_1(P), eps=1e-3)
    assert (a.enclosure * 2).overlaps(b.enclosure)
    assert abs(2 * a.raw_estimate - b.raw_estimate) < 1e-9


def test_point_rate_interval_soundness():
    P = (Fraction(0), Fraction(1))
    deep = point_escape_rate(X2_PLUS_1, P, eps=1e-9, max_k=20)
    for k in range(0, deep.k_used):
        shallow = point_escape_rate(X2_PLUS_1, P, eps=1e-12, max_k=k)
        assert shallow.enclosure.contains(deep.enclosure.mid)


def test_form_escape_rate_pushforward_and_pullback():
    phi = parse_form("X0-3*X1", 2)
    g = form_escape_rate(X2_PLUS_1, phi, eps=0.05)
    pushed = push_forward(X2_PLUS_1, phi).form
    g_push = form_escape_rate(X2_PLUS_1, pushed, eps=0.05)
    assert (g.enclosure * 4).overlaps(g_push.enclosure)
    g_pull = form_escape_rate(X2_PLUS_1, pull_back(X2_PLUS_1, phi), eps=0.05)
    assert g.enclosure.overlaps(g_pull.enclosure)
    assert abs(g.raw_estimate - g_pull.raw_estimate) < 1e-6


def test_form_escape_rate_finite_place():
    F = parse_map("2*X0^2+X1^2,X1^2")
    rate = form_escape_rate(F, parse_form("X0", 2), Place(2), eps=1e-3)
    assert rate.exact is not None and rate.exact[0] <= rate.exact[1]


def test_green_pairing_lift_independent_and_symmetric():
    P, Q = (Fraction(1, 2), Fraction(1)), (Fraction(3), Fraction(1))
    a = green_pairing(X2_PLUS_1, phi_of_point(Q), P, eps=0.05)
    b = green_pairing(X2_PLUS_1.scale(3), phi_of_point(Q), P, eps=0.05)
    c = green_pairing(X2_PLUS_1, phi_of_point(P), Q, eps=0.05)
    assert a.enclosure.overlaps(b.enclosure) and abs(a.raw_estimate - b.raw_estimate) < 1e-6
    assert a.enclosure.overlaps(c.enclosure) and abs(a.raw_estimate - c.raw_estimate) < 1e-6
    assert green_pairing(X2_PLUS_1, phi_of_point(Q), Q).infinite


def test_green_pairing_sum_matches_product_form():
    P, R, Q = (Fraction(1, 2), Fraction(1)), (Fraction(-2), Fraction(1)), (Fraction(3), Fraction(1))
    combo = green_pairing_sum(X2_PLUS_1, phi_of_point(Q), [(1, P), (1, R)], eps=0.05)
    joint = green_pairing(X2_PLUS_1, phi_of_point(P) * phi_of_point(R), Q, eps=0.05)
    assert combo.enclosure.overlaps(joint.enclosure)
    assert abs(combo.raw_estimate - joint.raw_estimate) < 1e-6
    assert green_pairing_sum(X2_PLUS_1, phi_of_point(Q), [(2, P), (-1, Q)]).infinite


def test_lyapunov_power_maps():
    assert abs(lyapunov_estimate(SQUARE).value - math.log(2)) < 1e-9
    assert abs(lyapunov_estimate(parse_map("X0^3,X1^3")).value - math.log(3)) < 1e-9
