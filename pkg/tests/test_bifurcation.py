"""Hopf-type hypothesis checks over parameter families."""

import json
from fractions import Fraction

import numpy as np
import pytest

from conftest import FIXTURES, tune_affine
from tangency import load_template
from tangency.bifurcation import (FamilySpec, count_cycles_numeric, degenerate_hopf_check,
                                  determinant, eval_V_at, hopf_scan, report_json,
                                  richardson_derivative, sweep_csv)
from tangency.errors import NoSignChange, NotMonodromicAtPoint
from tangency.model import parse_template

TWO_PARAM = """{
  "upper": {"X": [[-1, 1, 0, 0]], "Y": [[-1, 1, 1, 0], ["lambda", 1, 2, 0], ["mu", 1, 4, 0], [1, 1, 0, 1]]},
  "lower": {"X": [[1, 1, 0, 0]], "Y": [[-1, 1, 1, 0], [1, 1, 2, 0]]}
}"""


@pytest.fixture(scope="module")
def example2_family():
    return FamilySpec(load_template(FIXTURES / "example2_family.json"), {"lambda": (1, 3)})


def test_family_must_cover_parameters():
    with pytest.raises(ValueError):
        FamilySpec(load_template(FIXTURES / "example2_family.json"), {})


def test_hopf_scan_example2(example2_family):
    (rep,) = hopf_scan(example2_family, "lambda")
    assert rep.exact_root and rep.lambda0 == 2
    assert rep.V2_at_lambda0 == 0
    assert rep.d == Fraction(-2, 3) and rep.ell == Fraction(-4, 3)
    assert rep.hypothesis_ok
    assert rep.existence_side == "lambda < lambda0"
    assert rep.predicted_stability == "stable"
    assert abs(rep.predicted_x_star(Fraction(198, 100)) - np.sqrt(0.01)) < 1e-12
    assert rep.predicted_x_star(Fraction(202, 100)) is None
    d = json.loads(report_json([rep]))[0]
    assert d["hypothesis_ok"] is True


def test_hopf_scan_without_root(example2_family):
    with pytest.raises(NoSignChange):
        hopf_scan(example2_family, "lambda", (3, 4))


def test_hopf_scan_irrational_root():
    # V_2 = 2 lambda^2/3 - 4/3 vanishes at sqrt(2)
    text = TWO_PARAM.replace('"lambda"', '"lambda*lambda"').replace('"mu"', '0')
    family = FamilySpec(parse_template(text), {"lambda": (1, 2)})
    (rep,) = hopf_scan(family, "lambda")
    assert not rep.exact_root
    assert abs(float(rep.lambda0) - 2 ** 0.5) < 1e-20
    assert abs(float(rep.d) + 4 * 2 ** 0.5 / 3) < 1e-6
    assert rep.hypothesis_ok


def test_richardson_is_exact_for_quartics():
    f = lambda x: 3 * x ** 4 - x ** 3 + 2 * x
    est, d_h, d_half = richardson_derivative(f, Fraction(1, 2), Fraction(1, 10))
    assert est == 12 * Fraction(1, 8) - 3 * Fraction(1, 4) + 2
    assert d_h != est


def test_determinant_matches_numpy():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 5):
        m = rng.integers(-5, 6, size=(n, n))
        rows = [[Fraction(int(v)) for v in row] for row in m]
        assert abs(float(determinant(rows)) - np.linalg.det(m)) < 1e-9
    assert determinant([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]) == 0


def test_degenerate_hopf_two_parameters():
    family = FamilySpec(parse_template(TWO_PARAM), {"lambda": (1, 3), "mu": (-10, 10)})
    mu0 = tune_affine(lambda m: eval_V_at(family, {"lambda": Fraction(2), "mu": m}, 4)[4])
    rep = degenerate_hopf_check(family, {"lambda": Fraction(2), "mu": mu0}, 2)
    assert rep.V_vector == [0, 0]
    assert rep.jacobian[0] == [Fraction(-2, 3), 0]
    assert rep.det != 0 and rep.V_next != 0
    assert rep.hypothesis_ok and rep.path == "exact"
    assert json.loads(report_json(rep))["names"] == ["lambda", "mu"]
    # away from the point the hypothesis fails
    assert not degenerate_hopf_check(family, {"lambda": Fraction(2), "mu": mu0 + 1}, 2).hypothesis_ok
    with pytest.raises(ValueError):
        degenerate_hopf_check(family, {"lambda": Fraction(2), "mu": mu0}, 3)


def test_not_monodromic_point_is_named():
    text = TWO_PARAM.replace('[-1, 1, 1, 0], ["lambda"', '["lambda", 1, 1, 0], [0').replace('"mu"', '0')
    family = FamilySpec(parse_template(text), {"lambda": (-1, 1)})
    with pytest.raises(NotMonodromicAtPoint) as info:
        eval_V_at(family, {"lambda": Fraction(1)}, 2)
    assert "lambda=1" in str(info.value)


def test_sweep_csv_rows(example2_family):
    text = sweep_csv(example2_family, [{"lambda": Fraction(1)}, {"lambda": Fraction(2)}], 4)
    lines = text.strip().splitlines()
    assert lines[0] == "lambda,V_2,V_3,V_4"
    assert lines[2].split(",")[:2] == ["2", "0"]


def test_count_cycles(example2_family):
    n, report = count_cycles_numeric(example2_family, {"lambda": Fraction(199, 100)}, (0.005, 0.3))
    assert n == 1 and report.cycles[0][1] == "stable"
