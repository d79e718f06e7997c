"""Reduction of a monodromic field to its canonical form.

After the time rescaling by ``|X+-|`` the half fields read
``(+-delta, a x^(2k-1) + x^(2k) f(x) + y g(x, y))``.  This module computes
``a``, ``f`` and ``g`` as exact truncated series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import DivisionNotExact, InvariantViolation, NotMonodromic
from .exact import BiSeries, UniSeries
from .model import PiecewiseField, TangencyClassification, classify

__all__ = ["CanonicalForm", "HalfCanonical", "compute_a", "compute_fg", "canonical_form"]


@dataclass(frozen=True)
class HalfCanonical:
    side: str
    k: int
    a: object
    f: UniSeries
    g: BiSeries
    s: int          # x-velocity of the rescaled field: +delta upper, -delta lower


@dataclass(frozen=True)
class CanonicalForm:
    delta: int
    k_plus: int
    k_minus: int
    a_plus: object
    a_minus: object
    f_plus: UniSeries
    f_minus: UniSeries
    g_plus: BiSeries
    g_minus: BiSeries
    order: int
    field: object

    def half(self, side: str) -> HalfCanonical:
        if side == "upper":
            return HalfCanonical("upper", self.k_plus, self.a_plus, self.f_plus, self.g_plus, self.delta)
        if side == "lower":
            return HalfCanonical("lower", self.k_minus, self.a_minus, self.f_minus, self.g_minus, -self.delta)
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")

    def to_dict(self) -> dict:
        fmt = self.field.format
        def uni(s):
            return [fmt(c) for c in s.coeffs]
        def bi(s):
            return {f"{i},{j}": fmt(c) for (i, j), c in s.terms() if c != 0}
        return {
            "delta": self.delta, "k_plus": self.k_plus, "k_minus": self.k_minus,
            "a_plus": fmt(self.a_plus), "a_minus": fmt(self.a_minus),
            "order": self.order,
            "f_plus": uni(self.f_plus), "f_minus": uni(self.f_minus),
            "g_plus": bi(self.g_plus), "g_minus": bi(self.g_minus),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _require_monodromic(cls: TangencyClassification):
    if not cls.monodromic:
        raise NotMonodromic("; ".join(cls.reasons) or "not monodromic")


def compute_a(pf: PiecewiseField, cls: TangencyClassification):
    """``a+-`` = (2k-1)-th x-derivative of ``Y+-`` at 0 over ``(2k-1)! |X+-(0,0)|``."""
    _require_monodromic(cls)
    out = []
    for vf, k in ((pf.upper, cls.k_plus), (pf.lower, cls.k_minus)):
        x00 = vf.X.coeff(0, 0)
        # coefficient of x^(2k-1) already carries the 1/(2k-1)! factor
        out.append(vf.Y.coeff(2 * k - 1, 0) / abs(x00))
    return tuple(out)


def _half_fg(vf, k, a, s, order, field):
    zero = field.zero
    is_zero = field.is_zero
    deg = max(vf.X.degree, vf.Y.degree) + 2 * k + 1
    X0 = vf.X.at_y0(deg)
    Y0 = vf.Y.at_y0(deg)
    # s*Y(x,0) - a x^(2k-1) X(x,0), an exact polynomial; cancel x^(2k)
    num = Y0 * s - X0.shift(2 * k - 1).truncate(deg) * a
    try:
        num = num.unshift(2 * k, lambda c: is_zero(c, a))
    except DivisionNotExact as exc:
        raise InvariantViolation(f"f numerator does not vanish to order 2k: {exc}") from None
    num = UniSeries(num.coeffs, order, zero)
    f = num.div(UniSeries(X0.coeffs, order, zero), is_zero)

    # g: (X(x,0) Y(x,y) - X(x,y) Y(x,0)) / (y s X(x,y) X(x,0))
    total = order + 1
    X = vf.X.to_biseries(total)
    Y = vf.Y.to_biseries(total)
    X0b = BiSeries.from_terms({(i, 0): c for i, c in enumerate(X0.coeffs)}, total, zero)
    Y0b = BiSeries.from_terms({(i, 0): c for i, c in enumerate(Y0.coeffs)}, total, zero)
    gnum = (X0b * Y - X * Y0b).divide_by_y(is_zero)
    g = gnum.div((X * X0b).truncate(order) * s)
    return f, g


def compute_fg(pf: PiecewiseField, cls: TangencyClassification, order: int) -> CanonicalForm:
    """Canonical form with ``f+-`` and ``g+-`` valid through ``order``."""
    _require_monodromic(cls)
    a_plus, a_minus = compute_a(pf, cls)
    field = pf.field
    f_plus, g_plus = _half_fg(pf.upper, cls.k_plus, a_plus, cls.delta, order, field)
    f_minus, g_minus = _half_fg(pf.lower, cls.k_minus, a_minus, -cls.delta, order, field)
    canon = CanonicalForm(cls.delta, cls.k_plus, cls.k_minus, a_plus, a_minus,
                          f_plus, f_minus, g_plus, g_minus, order, field)
    check_reconstruction(pf, canon)
    return canon


def canonical_form(pf: PiecewiseField, order: int) -> CanonicalForm:
    return compute_fg(pf, classify(pf), order)


def eta_series(vf, s, order, field) -> BiSeries:
    """``s * Y / X`` expanded as a bivariate series to total ``order``."""
    return (vf.Y.to_biseries(order) * s).div(vf.X.to_biseries(order))


def check_reconstruction(pf: PiecewiseField, canon: CanonicalForm) -> None:
    """``s Y/X == a x^(2k-1) + x^(2k) f(x) + y g(x,y)`` through the computed order."""
    for side, vf in (("upper", pf.upper), ("lower", pf.lower)):
        h = canon.half(side)
        n = canon.order
        eta = eta_series(vf, h.s, n, canon.field)
        rebuilt = {}
        rebuilt[(2 * h.k - 1, 0)] = h.a
        for i, c in enumerate(h.f.coeffs):
            if 2 * h.k + i <= n:
                rebuilt[(2 * h.k + i, 0)] = rebuilt.get((2 * h.k + i, 0), 0) + c
        for (i, j), c in h.g.terms():
            if i + j + 1 <= n:
                rebuilt[(i, j + 1)] = rebuilt.get((i, j + 1), 0) + c
        scale = max((abs(c) for _, c in eta.terms()), default=1)
        for (i, j), c in eta.terms():
            diff = c - rebuilt.get((i, j), 0)
            if not canon.field.is_zero(diff, scale):
                raise InvariantViolation(
                    f"{side} canonical reconstruction fails at x^{i} y^{j}: {diff}")


def factorial_ratio(n: int, m: int) -> int:
    """n!/m! for n >= m."""
    return math.perm(n, n - m)
