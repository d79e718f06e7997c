"""Truncated series arithmetic checked against sympy."""

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from tangency.errors import DivisionNotExact, NonzeroConstantTerm, OrderBudgetExceeded
from tangency.exact import (BigFloatField, BiSeries, RationalField, UniSeries, series_compose,
                            series_div, series_mul)

x, y = sp.symbols("x y")
fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def to_sympy(s: UniSeries):
    return sum(sp.Rational(c.numerator, c.denominator) * x ** i for i, c in enumerate(s.coeffs))


def sympy_coeffs(expr, n):
    poly = sp.series(expr, x, 0, n + 1).removeO()
    return [Fraction(str(sp.Rational(poly.coeff(x, i)))) for i in range(n + 1)]


@settings(max_examples=40, deadline=None)
@given(st.lists(fractions, min_size=6, max_size=6), st.lists(fractions, min_size=6, max_size=6))
def test_product_matches_sympy(a, b):
    A, B = UniSeries(a), UniSeries(b)
    assert list((A * B).coeffs) == sympy_coeffs(sp.expand(to_sympy(A) * to_sympy(B)), 5)


@settings(max_examples=40, deadline=None)
@given(st.lists(fractions, min_size=6, max_size=6), st.lists(fractions, min_size=6, max_size=6))
def test_quotient_matches_sympy(a, b):
    b[0] = b[0] or Fraction(1)
    A, B = UniSeries(a), UniSeries(b)
    assert list(series_div(A, B).coeffs) == sympy_coeffs(to_sympy(A) / to_sympy(B), 5)


@settings(max_examples=30, deadline=None)
@given(st.lists(fractions, min_size=6, max_size=6), st.lists(fractions, min_size=5, max_size=5))
def test_composition_matches_sympy(a, b):
    A, B = UniSeries(a), UniSeries([Fraction(0)] + b)
    expected = sympy_coeffs(sp.expand(to_sympy(A).subs(x, to_sympy(B))), 5)
    assert list(series_compose(A, B).coeffs) == expected


def test_orders_propagate():
    a = UniSeries([1, 2, 3], order=4)
    b = UniSeries([1, 1], order=2)
    assert (a * b).order == 2
    assert (a + b).order == 2
    assert a.shift(3).order == 7
    assert a.derivative(2).order == 2


def test_order_budget_is_enforced():
    with pytest.raises(OrderBudgetExceeded):
        UniSeries([1, 2], order=1)[2]
    with pytest.raises(OrderBudgetExceeded):
        BiSeries.from_terms({(1, 1): 1}, 2)[2, 1]


def test_division_with_common_power_of_x():
    num = UniSeries([0, 0, 2, 4], order=5)
    den = UniSeries([0, 1, 1], order=5)
    q = num / den
    assert q.coeffs[:3] == (0, 2, 2)
    assert q.order == 4
    with pytest.raises(DivisionNotExact):
        UniSeries([1, 1], order=3).unshift(1)


def test_compose_needs_zero_constant():
    with pytest.raises(NonzeroConstantTerm):
        series_compose(UniSeries([1, 1]), UniSeries([1, 1]))


def test_bivariate_product_and_division():
    p = {(0, 0): 1, (1, 0): 2, (0, 1): -1, (1, 1): Fraction(1, 3)}
    q = {(0, 0): 2, (2, 0): 1, (0, 2): 5}
    P, Q = BiSeries.from_terms(p, 4), BiSeries.from_terms(q, 4)
    sp_p = sum(sp.Rational(str(c)) * x ** i * y ** j for (i, j), c in p.items())
    sp_q = sum(sp.Rational(str(c)) * x ** i * y ** j for (i, j), c in q.items())
    prod = sp.Poly(sp.expand(sp_p * sp_q), x, y)
    for (i, j), c in (P * Q).terms():
        assert c == Fraction(str(prod.coeff_monomial(x ** i * y ** j)))
    back = (P * Q) / Q
    assert all(back[i, j] == Fraction(p.get((i, j), 0)) for (i, j), _ in back.terms())


def test_divide_by_y_and_slices():
    s = BiSeries.from_terms({(1, 1): 3, (0, 2): 2, (2, 1): 1}, 4)
    q = s.divide_by_y()
    assert q[1, 0] == 3 and q[0, 1] == 2 and q[2, 0] == 1
    assert q.order == 3
    assert list(s.y_slice(1).coeffs) == [0, 3, 1, 0]
    with pytest.raises(DivisionNotExact):
        BiSeries.from_terms({(1, 0): 1}, 3).divide_by_y()


def test_partial_derivative():
    s = BiSeries.from_terms({(3, 2): 1}, 6)
    d = s.partial(1, 1)
    assert d[2, 1] == 6


def test_rational_field_is_exact():
    f = RationalField()
    assert f.convert("0.1") == Fraction(1, 10)
    assert f.convert(3) == 3
    assert f.is_zero(Fraction(0)) and not f.is_zero(Fraction(1, 10 ** 40))
    with pytest.raises(TypeError):
        f.convert(0.5)


def test_bigfloat_fields_keep_their_own_precision():
    f30, f60 = BigFloatField(30), BigFloatField(60)
    third30 = f30.convert(Fraction(1, 3))
    third60 = f60.convert(Fraction(1, 3))
    assert abs(third60 * 3 - 1) < f60.ctx.mpf(10) ** -58
    assert abs(third30 * 3 - 1) < f30.ctx.mpf(10) ** -28
    assert f60.is_zero(f60.ctx.mpf(10) ** -50)
    assert not f60.is_zero(f60.ctx.mpf(10) ** -40)
    assert abs(f60.sqrt(109) ** 2 - 109) < f60.ctx.mpf(10) ** -55
    with pytest.raises(ValueError):
        BigFloatField(10)


def test_series_over_bigfloats():
    f = BigFloatField(40)
    a = UniSeries([f.one, f.one], order=6, zero=f.zero)
    inv = UniSeries([f.one], order=6, zero=f.zero) / a
    for i, c in enumerate(inv.coeffs):
        assert abs(c - (-1) ** i) < f.eps
    assert series_mul(a, inv).agrees_with(UniSeries([f.one], 6, f.zero), is_zero=f.is_zero)
