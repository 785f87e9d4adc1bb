from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from divheight.poly import (
    DegreeMismatch,
    HomogeneousForm,
    ParseError,
    PolyMap,
    coprime_integer_point,
    factor_form,
    jacobian_form,
    monomials,
    parse_form,
    parse_map,
    parse_point,
    primitive_part,
    pull_back,
)


def forms(num_vars=2, max_degree=3):
    @st.composite
    def build(draw):
        deg = draw(st.integers(0, max_degree))
        monos = monomials(num_vars, deg)
        coeffs = draw(st.lists(st.integers(-5, 5), min_size=len(monos), max_size=len(monos)))
        return HomogeneousForm(num_vars, deg, dict(zip(monos, coeffs)))

    return build()


def test_parse_roundtrip():
    f = parse_form("3*X0^2 - X0*X1 + 1/2*X1^2", 2)
    assert f.coefficient((2, 0)) == 3
    assert f.coefficient((1, 1)) == -1
    assert f.coefficient((0, 2)) == Fraction(1, 2)
    assert parse_form(str(f), 2) == f


def test_parse_errors_carry_column():
    with pytest.raises(ParseError) as err:
        parse_form("X0^2 + X3", 2)
    assert err.value.column > 0
    with pytest.raises(ParseError):
        parse_form("X0*X1*2", 2)


def test_inhomogeneous_rejected():
    with pytest.raises((ParseError, DegreeMismatch)):
        parse_form("X0^2 + X1", 2)
    with pytest.raises(DegreeMismatch):
        parse_map("X0^2,X1")


def test_parse_point_forms():
    assert parse_point("(2:1)") == (2, 1)
    assert parse_point("1/2, 3") == (Fraction(1, 2), 3)


def test_coprime_point():
    R, s = coprime_integer_point((Fraction(4, 3), Fraction(-2, 3)))
    assert R == (2, -1) and s == Fraction(2, 3)


def test_primitive_part_sign_and_content():
    p = primitive_part(parse_form("-4*X0^2 + 6*X1^2", 2))
    assert p.form == parse_form("2*X0^2 - 3*X1^2", 2)
    assert p.scalar == -2


def test_factor_form():
    phi = parse_form("-4*X0^3 + 4*X0*X1^2", 2)
    c, parts = factor_form(phi)
    prod = HomogeneousForm.constant(2, c)
    for B, n in parts:
        prod = prod * B**n
    assert prod == phi
    assert all(B.degree == 1 for B, _ in parts)


def test_jacobian_of_power_map():
    F = parse_map("X0^2,X1^2")
    assert jacobian_form(F) == parse_form("4*X0*X1", 2)


def test_weil_scaling_and_primitive_lift():
    F = parse_map("4*X0^2,2*X1^2")
    G, c = F.primitive_lift()
    assert G == parse_map("2*X0^2,X1^2") and c == 2


@given(forms(), forms())
def test_product_degree_and_evaluation(f, g):
    pt = (Fraction(3, 2), Fraction(-2))
    assert (f * g).evaluate(pt) == f.evaluate(pt) * g.evaluate(pt)
    if not (f * g).is_zero():
        assert (f * g).degree == f.degree + g.degree


@given(forms(max_degree=2))
def test_pull_back_evaluates_composition(phi):
    F = parse_map("X0^2 - X1^2,X0*X1 + X1^2")
    pt = (Fraction(2), Fraction(-3))
    assert pull_back(F, phi).evaluate(pt) == phi.evaluate(F(pt))


@given(forms())
def test_content_times_primitive(phi):
    if phi.is_zero() or phi.degree == 0:
        return
    p = primitive_part(phi)
    assert p.form.scale(p.scalar) == phi
    assert p.form.content() == 1
    assert p.form.leading_term()[1] > 0
