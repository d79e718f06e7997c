"""Generalized trigonometric functions and the polar half-return map."""

import math
import random

import numpy as np
import pytest
from scipy.special import beta

from conftest import random_fixtures
from tangency import canonical_form
from tangency.errors import VanishingF
from tangency.model import random_monodromic_field
from tangency.numeric import IntegratorConfig, half_return
from tangency.polar import (cs_zero, gen_trig, period, polar_half, polar_return, polar_rhs,
                            trig_table_csv)


def test_circle_period():
    assert abs(period(1, 1) - 2 * math.pi) < 1e-12


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 3), (1, 6)])
def test_period_is_a_beta_function(p, q):
    expected = 2 * p ** (-1 / (2 * q)) * q ** (-1 / (2 * p)) * beta(1 / (2 * q), 1 / (2 * p))
    assert abs(period(p, q) - expected) < 1e-11 * expected


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (1, 3), (1, 4)])
def test_identity_and_symmetry(p, q):
    trig = gen_trig(p, q)
    theta = trig.grid(401)
    assert np.max(np.abs(trig.identity_residual(theta))) < 1e-11
    cs, sn = trig(theta)
    cs_m, sn_m = trig(-theta)
    assert np.max(np.abs(cs - cs_m)) < 1e-11
    assert np.max(np.abs(sn + sn_m)) < 1e-11
    assert abs(cs_zero(trig) - trig.T / 4) < 1e-9
    assert abs(trig.cs(trig.T / 2) + trig.cs(0.0)) < 1e-11


def test_circle_functions_are_cos_and_sin():
    trig = gen_trig(1, 1)
    theta = np.linspace(-3, 3, 61)
    assert np.max(np.abs(trig.cs(theta) - np.cos(theta))) < 1e-12
    assert np.max(np.abs(trig.sn(theta) - np.sin(theta))) < 1e-12


def test_outside_the_period_is_rejected():
    trig = gen_trig(1, 2)
    with pytest.raises(ValueError):
        trig.cs(trig.T)
    with pytest.raises(ValueError):
        gen_trig(0, 1)


def test_table_csv():
    text = trig_table_csv(gen_trig(1, 2), n=5)
    lines = text.strip().splitlines()
    assert lines[0] == "theta,Cs,Sn" and len(lines) == 6


def test_mirroring_normalizes_the_sign_pattern():
    for conv in ("invisible", "reflected"):
        pf = random_monodromic_field(random.Random(3), 1, 2, -1, convention=conv)
        canon = canonical_form(pf, 12)
        for side in ("upper", "lower"):
            for x_sign in (1, -1):
                ph = polar_half(canon, side, x_sign)
                assert ph.s * ph.a < 0
                assert ph.mirror_x == (x_sign < 0)


@pytest.mark.parametrize("pf", random_fixtures(6, seed=30, ks=(1, 2)), ids=lambda _: "fixture")
def test_polar_and_cartesian_returns_agree(pf):
    canon = canonical_form(pf, 24)
    cfg = IntegratorConfig(abs_tol=1e-14, rel_tol=1e-13)
    for side in ("upper", "lower"):
        for x0 in (0.05, -0.03):
            try:
                polar = polar_return(canon, side, x0)
            except VanishingF:
                continue
            assert abs(polar - half_return(pf, side, x0, cfg)) < 1e-10


def test_polar_rhs_checks_the_trig_pair():
    pf = random_monodromic_field(random.Random(1), 2, 1, 1)
    canon = canonical_form(pf, 10)
    with pytest.raises(ValueError):
        polar_rhs(canon, "upper", gen_trig(1, 2))
    rhs = polar_rhs(canon, "upper")
    F, G = rhs(0.0, 0.3)
    assert F != 0 and G == 0


def test_polar_threshold_routes_small_starts():
    pf = random_monodromic_field(random.Random(9), 1, 1, 1)
    plain = half_return(pf, "upper", 0.01)
    routed = half_return(pf, "upper", 0.01, IntegratorConfig(polar_threshold=0.05))
    assert abs(plain - routed) < 1e-10
