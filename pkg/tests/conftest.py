from __future__ import annotations

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from tangency import make_field, lyapunov
from tangency.model import random_monodromic_field

HERE = Path(__file__).parent
FIXTURES = HERE.parent / "fixtures"
sys.path.insert(0, str(HERE))


def example1(k_plus, k_minus, lam):
    """``(-1, -x^(2k+ - 1)(lam x + 1))`` above, ``(1, x^(2k- - 1)(x - 1))`` below."""
    upper = ({(0, 0): -1}, {(2 * k_plus - 1, 0): -1, (2 * k_plus, 0): -lam})
    lower = ({(0, 0): 1}, {(2 * k_minus - 1, 0): -1, (2 * k_minus, 0): 1})
    return make_field(upper, lower)


def example2(k, lam):
    """``(-1, x^(2k-1)(lam x - 1) + y)`` above, ``(1, x^(2k-1)(x - 1))`` below."""
    upper = ({(0, 0): -1}, {(2 * k - 1, 0): -1, (2 * k, 0): lam, (0, 1): 1})
    lower = ({(0, 0): 1}, {(2 * k - 1, 0): -1, (2 * k, 0): 1})
    return make_field(upper, lower)


def example2_V4(k, lam):
    """Closed form of the fourth coefficient for :func:`example2`."""
    lam = Fraction(lam)
    poly = (4 * (k * (4 * k * (k + 3) + 37) + 40) - 12 * (14 * k + 19) * lam
            + 6 * (2 * k + 3) * (2 * k + 13) * lam ** 2
            - 4 * (2 * k + 3) * (k * (2 * k + 3) + 7) * lam ** 3)
    return poly / (3 * (3 + 2 * k) * (1 + 2 * k) ** 3)


def random_fixtures(n, seed=0, ks=(1, 2, 3), conventions=("invisible", "reflected")):
    """``n`` deterministic random monodromic fields cycling through ``k``, ``delta`` and convention."""
    rng = random.Random(seed)
    out = []
    for m in range(n):
        kp = ks[m % len(ks)]
        km = ks[(m // len(ks)) % len(ks)]
        delta = 1 if (m // 9) % 2 == 0 else -1
        conv = conventions[(m // 18) % len(conventions)]
        out.append(random_monodromic_field(rng, kp, km, delta, convention=conv))
    return out


def tune_affine(fn, lo=Fraction(0), hi=Fraction(1)):
    """Root of an exactly affine rational function, checked at a third point."""
    f0, f1 = fn(lo), fn(hi)
    if f1 == f0:
        return None
    root = lo - f0 * (hi - lo) / (f1 - f0)
    assert fn(root) == 0
    return root


def with_coefficient(pf, side, key, value):
    """Copy of ``pf`` with the ``Y`` coefficient ``key`` of one side replaced."""
    halves = {}
    for s in ("upper", "lower"):
        vf = pf.half(s)
        X, Y = dict(vf.X.terms), dict(vf.Y.terms)
        if s == side:
            Y[key] = value
        halves[s] = (X, {k: v for k, v in Y.items() if v})
    return make_field(halves["upper"], halves["lower"])


def tuned_fixture(rng, k_plus, k_minus, delta, n_tuned, convention="invisible"):
    """Random field whose ``V_2, V_4, ..., V_{2 n_tuned}`` vanish exactly.

    ``V_{2m}`` is affine in the upper ``x^(2k+ + 2m - 2)`` coefficient of ``Y``
    once the lower ones are fixed, so the coefficients are solved one at a
    time.  Returns ``None`` when a step is not solvable.
    """
    pf = random_monodromic_field(rng, k_plus, k_minus, delta, convention=convention)
    for m in range(1, n_tuned + 1):
        key = (2 * k_plus + 2 * m - 2, 0)
        n = 2 * m

        def V(c, pf=pf, key=key, n=n):
            return lyapunov(with_coefficient(pf, "upper", key, c), n).V[n]

        c = tune_affine(V)
        if c is None:
            return None
        pf = with_coefficient(pf, "upper", key, c)
    return pf


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES: dict = {}


def record_criterion(number, ok, detail, elapsed):
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  ({elapsed:.1f} s)  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
