"""The reduced form ``s Y/X = a x^(2k-1) + x^(2k) f(x) + y g(x, y)``."""

import random
from fractions import Fraction

import pytest

from conftest import FIXTURES, example2, random_fixtures
from oracles import eta_expansion, half_data
from tangency import canonical_form, load_field
from tangency.canonical import compute_a
from tangency.errors import NotMonodromic, OrderBudgetExceeded
from tangency.model import classify, random_monodromic_field


@pytest.mark.parametrize("pf", random_fixtures(18, seed=4), ids=lambda _: "fixture")
def test_canonical_form_matches_direct_expansion(pf):
    order = 7
    canon = canonical_form(pf, order)
    for side in ("upper", "lower"):
        X, Y, _, k = half_data(pf, side)
        h = canon.half(side)
        eta = eta_expansion(X, Y, h.s, order + 2 * k)
        assert eta.get((2 * k - 1, 0), 0) == h.a
        for i in range(2 * k - 1):
            assert eta.get((i, 0), 0) == 0
        for i in range(order + 1):
            assert h.f[i] == eta.get((2 * k + i, 0), 0)
        for (i, j), c in h.g.terms():
            assert c == eta.get((i, j + 1), 0)


def test_example2_canonical_data():
    canon = canonical_form(example2(1, Fraction(2)), 6)
    assert canon.delta == -1
    up, lo = canon.half("upper"), canon.half("lower")
    assert (up.s, lo.s) == (-1, 1)
    assert up.a == -1 and lo.a == -1
    assert up.f[0] == 2 and lo.f[0] == 1
    assert up.g[0, 0] == 1 and lo.g[0, 0] == 0
    # delta*a > 0 on both sides: the reflected sign pattern
    assert canon.delta * up.a > 0 and canon.delta * lo.a > 0


def test_pure_canonical_field_has_vanishing_f_and_g():
    canon = canonical_form(load_field(FIXTURES / "pure_canonical_k2.json"), 5)
    for side in ("upper", "lower"):
        h = canon.half(side)
        assert h.k == 2
        assert h.f.is_zero()
        assert all(c == 0 for _, c in h.g.terms())
    assert canon.half("upper").a == -1 and canon.half("lower").a == -1


def test_a_uses_absolute_x_velocity():
    pf = random_monodromic_field(random.Random(2), 2, 1, -1)
    cls = classify(pf)
    a_plus, a_minus = compute_a(pf, cls)
    assert a_plus == pf.upper.Y.coeff(3, 0) / abs(pf.upper.X.coeff(0, 0))
    assert a_minus == pf.lower.Y.coeff(1, 0) / abs(pf.lower.X.coeff(0, 0))


def test_order_is_respected():
    canon = canonical_form(example2(2, Fraction(1)), 4)
    assert canon.order == 4
    with pytest.raises(OrderBudgetExceeded):
        canon.half("upper").f[5]


def test_not_monodromic_is_rejected():
    with pytest.raises(NotMonodromic):
        canonical_form(load_field(FIXTURES / "visible_fold.json"), 4)


def test_json_round_trip_fields():
    d = canonical_form(example2(1, Fraction(3, 2)), 3).to_dict()
    assert d["delta"] == -1 and d["k_plus"] == 1
    assert d["f_plus"][0] == "3/2"
