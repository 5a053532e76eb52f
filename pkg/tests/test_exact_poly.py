"""Exact polynomial layer: ring identities, substitutions, evaluation."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from newton_sublevel import (
    PuiseuxPoly,
    deriv_x,
    deriv_y,
    divide_out_x,
    eval_rational,
    eval_real,
    format_poly,
    poly_add,
    poly_mul,
    poly_scale,
    reflect_axes,
    subst_scale,
    subst_shear,
)
from helpers import phase

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
# exponents: x rational with small denominator, y small nonnegative integer
x_exps = st.fractions(min_value=0, max_value=6, max_denominator=3)
y_exps = st.integers(min_value=0, max_value=5)


@st.composite
def polys(draw, max_terms=5):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(n):
        a = draw(x_exps)
        b = draw(y_exps)
        c = draw(rationals)
        if c:
            terms[(a, b)] = terms.get((a, b), Fraction(0)) + c
    return PuiseuxPoly({k: v for k, v in terms.items() if v})


@given(polys(), polys())
def test_add_commutes(p, q):
    assert poly_add(p, q).terms == poly_add(q, p).terms


@given(polys(), polys(), polys())
def test_mul_distributes(p, q, r):
    lhs = poly_mul(p, poly_add(q, r))
    rhs = poly_add(poly_mul(p, q), poly_mul(p, r))
    assert lhs.terms == rhs.terms


@given(polys(), polys())
def test_mul_commutes(p, q):
    assert poly_mul(p, q).terms == poly_mul(q, p).terms


@st.composite
def int_exp_polys(draw, max_terms=5):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(n):
        a = Fraction(draw(st.integers(min_value=0, max_value=6)))
        b = draw(y_exps)
        c = draw(rationals)
        if c:
            terms[(a, b)] = terms.get((a, b), Fraction(0)) + c
    return PuiseuxPoly({k: v for k, v in terms.items() if v})


@given(int_exp_polys(), st.fractions(min_value=0, max_value=3, max_denominator=4),
       st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_eval_is_ring_hom(p, x, y):
    # evaluation of a product equals the product of evaluations
    q = poly_mul(p, p)
    px = eval_rational(p, x, y)
    assert eval_rational(q, x, y) == px * px


@given(polys())
def test_scale_shear_roundtrip(p):
    # y -> y + x^2 then y -> y - x^2 is the identity
    shifted = subst_shear(p, 1, PuiseuxPoly.monomial(1, Fraction(2), 0))
    back = subst_shear(shifted, 1, PuiseuxPoly.monomial(-1, Fraction(2), 0))
    assert back.terms == p.terms


def test_subst_shear_expands_square():
    # (y + x^2)^2 pulled back through y -> y - x^2 gives y^2
    p = phase((1, 0, 2), (-2, 2, 1), (1, 4, 0))  # (y - x^2)^2
    sheared = subst_shear(p, 1, PuiseuxPoly.monomial(1, Fraction(2), 0))
    assert sheared.terms == phase((1, 0, 2)).terms


def test_subst_scale_moves_exponents():
    # y -> x^m y multiplies each term by x^(m b)
    p = phase((1, 1, 2), (2, 3, 0))
    q = subst_scale(p, Fraction(3, 2))
    assert dict(q.items()) == {(Fraction(4), 2): Fraction(1), (Fraction(3), 0): Fraction(2)}


def test_divide_out_x():
    p = phase((1, 4, 2), (2, 3, 0))
    q = divide_out_x(p, Fraction(3))
    assert dict(q.items()) == {(Fraction(1), 2): Fraction(1), (Fraction(0), 0): Fraction(2)}
    with pytest.raises(ValueError):
        divide_out_x(p, Fraction(4))  # would create a negative exponent


def test_reflect_axes_involution():
    p = phase((1, 2, 1), (-3, 1, 3))
    assert reflect_axes(reflect_axes(p, -1, -1), -1, -1).terms == p.terms
    # x -> -x on odd x-power flips the sign (integer exponents only)
    q = reflect_axes(phase((1, 3, 0)), -1, 1)
    assert dict(q.items()) == {(Fraction(3), 0): Fraction(-1)}


def test_reflect_axes_fractional_exponent_rejected():
    with pytest.raises(ValueError):
        reflect_axes(phase((1, Fraction(1, 2), 0)), -1, 1)


@given(polys())
def test_deriv_y_kills_constants(p):
    d = deriv_y(p, 1)
    assert all(b >= 0 for (_, b) in d.support())
    again = deriv_y(p, 2) if p.y_degree() >= 2 else None
    if again is not None:
        assert deriv_y(deriv_y(p, 1), 1).terms == again.terms


def test_deriv_x_product_rule_spot():
    p = phase((1, 2, 1))
    q = phase((1, 1, 0))
    lhs = deriv_x(poly_mul(p, q), 1)
    rhs = poly_add(poly_mul(deriv_x(p, 1), q), poly_mul(p, deriv_x(q, 1)))
    assert lhs.terms == rhs.terms


def test_eval_real_matches_rational():
    p = phase((1, 3, 1), (-2, 0, 2))
    xr, yr = Fraction(1, 4), Fraction(3, 2)
    exact = eval_rational(p, xr, yr)
    approx = eval_real(p, float(xr), float(yr))
    assert abs(approx - float(exact)) < 1e-12


def test_eval_real_fractional_exponent():
    # x^(3/2)*y at (1/4, 3/2): (1/8)*(3/2) = 3/16
    p = phase((1, Fraction(3, 2), 1))
    assert abs(eval_real(p, 0.25, 1.5) - 3 / 16) < 1e-15
    with pytest.raises(ValueError):
        eval_rational(p, Fraction(1, 4), Fraction(3, 2))


def test_format_poly_readable():
    p = phase((1, 0, 2), (-2, 2, 1), (1, 4, 0))
    s = format_poly(p)
    assert s == "y^2 - 2*x^2*y + x^4"
    assert format_poly(PuiseuxPoly.zero()) == "0"
    assert "x^(1/2)" in format_poly(phase((1, Fraction(1, 2), 0)))
