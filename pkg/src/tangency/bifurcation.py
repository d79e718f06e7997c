"""Parameter sweeps, Hopf-type hypothesis checks and cycle counts.

Parameter derivatives of the Lyapunov coefficients are central finite
differences over exact (or high-precision) evaluations, improved by one
Richardson step.  No symbolic parameter propagation takes place.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import NoSignChange, NotMonodromic, NotMonodromicAtPoint
from .exact import BigFloatField
from .lyapunov import LyapunovResult, lyapunov
from .model import FieldTemplate, PiecewiseField
from .numeric import CycleReport, IntegratorConfig, find_cycles

__all__ = [
    "FamilySpec", "HopfReport", "DegenerateHopfReport", "eval_V_at", "eval_lyapunov_at",
    "hopf_scan", "degenerate_hopf_check", "count_cycles_numeric", "sweep_csv", "richardson_derivative",
]


@dataclass
class FamilySpec:
    """Field template plus, for each free name, a fixed value, an interval or a list.

    Intervals are ``(lo, hi)`` tuples, lists are explicit grids.  Values may
    be ints, ``Fraction``, decimal strings or mpmath numbers.
    """

    template: FieldTemplate
    sweep: dict = dc_field(default_factory=dict)
    digits: int = 50

    def __post_init__(self):
        missing = self.template.unbound() - set(self.sweep)
        if missing:
            raise ValueError(f"sweep does not cover parameter(s): {', '.join(sorted(missing))}")

    def free_names(self) -> list[str]:
        return [n for n, v in self.sweep.items() if isinstance(v, (tuple, list))]

    def fixed_values(self) -> dict:
        return {n: v for n, v in self.sweep.items() if not isinstance(v, (tuple, list))}

    def bind(self, point: dict) -> PiecewiseField:
        return self.template.bind({**self.fixed_values(), **point}, digits=self.digits)

    def grid(self):
        """All points of the explicit list grids, in deterministic order."""
        names = [n for n, v in self.sweep.items() if isinstance(v, list)]
        for combo in itertools.product(*(self.sweep[n] for n in names)):
            yield dict(zip(names, combo))


def eval_lyapunov_at(family: FamilySpec, point: dict, n_max: int) -> LyapunovResult:
    pf = family.bind(point)
    try:
        return lyapunov(pf, n_max)
    except NotMonodromic as exc:
        raise NotMonodromicAtPoint(f"at {_point_text(point)}: {exc}") from None


def eval_V_at(family: FamilySpec, point: dict, n_max: int) -> dict:
    """``{n: V_n}`` for ``n = 2..n_max`` at one parameter point."""
    return eval_lyapunov_at(family, point, n_max).V


def _point_text(point):
    return ", ".join(f"{k}={v}" for k, v in point.items())


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def richardson_derivative(fn, x0, h):
    """Central difference at ``h`` and ``h/2`` combined to cancel the ``h^2`` term.

    Returns ``(estimate, d_h, d_half)``.  Exact for polynomials of degree <= 4
    when ``fn`` is evaluated exactly.
    """
    def central(step):
        return (fn(x0 + step) - fn(x0 - step)) / (2 * step)
    d_h = central(h)
    d_half = central(h / 2)
    return (4 * d_half - d_h) / 3, d_h, d_half


def _default_step(value, digits):
    if isinstance(value, (int, Fraction)):
        return Fraction(1, 1000)
    return BigFloatField(digits).convert(10) ** (-(digits // 6))


# ---------------------------------------------------------------------------
# Hopf-type bifurcation (one parameter)
# ---------------------------------------------------------------------------

@dataclass
class HopfReport:
    name: str
    lambda0: object
    V2_at_lambda0: object
    d: object
    ell: object
    hypothesis_ok: bool
    path: str
    exact_root: bool

    @property
    def existence_side(self) -> str:
        """Where ``d * ell * (lambda - lambda0) < 0``."""
        if not self.hypothesis_ok:
            return "none"
        return f"{self.name} < lambda0" if self.d * self.ell > 0 else f"{self.name} > lambda0"

    @property
    def predicted_stability(self) -> str:
        return "stable" if self.ell < 0 else "unstable"

    def predicted_x_star(self, value) -> float | None:
        """Leading-order amplitude ``sqrt(-d (lambda - lambda0) / ell)``."""
        arg = -float(self.d) * (float(value) - float(self.lambda0)) / float(self.ell)
        return math.sqrt(arg) if arg > 0 else None

    def to_dict(self) -> dict:
        return {
            "parameter": self.name,
            "lambda0": _num(self.lambda0), "V2_at_lambda0": _num(self.V2_at_lambda0),
            "d": _num(self.d), "ell": _num(self.ell),
            "hypothesis_ok": self.hypothesis_ok,
            "existence_side": self.existence_side,
            "predicted_stability": self.predicted_stability,
            "exact_root": self.exact_root,
            "path": self.path,
        }


def _num(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (int, float)):
        return repr(v)
    return str(v)


def _convert_interval(interval):
    out = []
    for v in interval:
        if isinstance(v, (int, Fraction)):
            out.append(Fraction(v))
        elif isinstance(v, str):
            out.append(Fraction(v))
        else:
            out.append(Fraction(str(v)))
    return out


_GRID = 2 ** 110
_SIMPLE_DENOMINATOR = 10 ** 12


def _find_roots(fn, lo, hi, n_sub=16, max_iter=200, width=Fraction(1, 10 ** 30)):
    """Exact-arithmetic Illinois iteration on every sign change of ``fn`` over ``[lo, hi]``."""
    pts = [lo + (hi - lo) * Fraction(i, n_sub) for i in range(n_sub + 1)]
    vals = [fn(p) for p in pts]
    roots = []
    for i, (p, v) in enumerate(zip(pts, vals)):
        if v == 0 and (not roots or roots[-1][0] != p):
            roots.append((p, True))
    for (a, fa), (b, fb) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
        if fa == 0 or fb == 0 or (fa > 0) == (fb > 0):
            continue
        exact = False
        mid = (a + b) / 2
        fm = fn(mid)
        for it in range(max_iter):
            if fm == 0:
                exact = True
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b, fb = mid, fm
            if b - a < width:
                break
            # alternate secant and bisection steps; secant is exact on linear pieces
            mid = a - fa * (b - a) / (fb - fa) if it % 2 == 0 else (a + b) / 2
            if mid.denominator > _SIMPLE_DENOMINATOR:
                # keep iterates on a fixed dyadic grid so denominators stay bounded
                mid = Fraction(round(mid * _GRID), _GRID)
            if not a < mid < b:
                mid = (a + b) / 2
            fm = fn(mid)
        roots.append((mid, exact))
    roots.sort(key=lambda r: r[0])
    return roots


def _as_fraction(v):
    return v if isinstance(v, Fraction) else Fraction(str(v))


def hopf_scan(family: FamilySpec, name: str, interval=None, h=None) -> list[HopfReport]:
    """Roots of ``V_2`` in the parameter ``name`` with ``d = V_2'`` and ``ell = V_4``.

    Raises :class:`NoSignChange` when ``V_2`` has no root on the interval.
    """
    interval = interval if interval is not None else family.sweep.get(name)
    if not isinstance(interval, (tuple, list)) or len(interval) != 2:
        raise ValueError(f"need an interval (lo, hi) for {name!r}")
    lo, hi = _convert_interval(interval)
    rational = family.template.bind({**family.fixed_values(), name: lo}, digits=family.digits).field.exact

    def V(value, n_max=2):
        return eval_V_at(family, {name: value}, n_max)

    def v2(value):
        out = V(value)[2]
        return out if rational else _as_fraction(out)

    roots = _find_roots(v2, lo, hi)
    if not roots:
        raise NoSignChange(f"V_2 does not change sign on [{lo}, {hi}]")
    reports = []
    for lam0, exact in roots:
        res = eval_lyapunov_at(family, {name: lam0}, 4)
        step = Fraction(h) if h is not None else Fraction(1, 1000)
        d, _, _ = richardson_derivative(lambda v: V(v)[2], lam0, step)
        field = res.field
        v2_0, ell = res.V[2], res.V[4]
        scale = max(abs(res.alpha_plus[1]), abs(res.alpha_minus[1]), 1)
        v2_small = field.is_zero(v2_0, scale) if exact else abs(float(v2_0)) <= 1e-12 * float(scale)
        ok = bool(v2_small and not field.is_zero(d) and not field.is_zero(ell))
        reports.append(HopfReport(name, lam0, v2_0, d, ell, ok, res.path, exact))
    return reports


# ---------------------------------------------------------------------------
# degenerate Hopf (n parameters)
# ---------------------------------------------------------------------------

@dataclass
class DegenerateHopfReport:
    names: list
    Lambda0: dict
    V_vector: list          # V_2, V_4, ..., V_2n at Lambda0
    jacobian: list          # rows i: d V_{2i} / d lambda_j
    det: object
    V_next: object          # V_{2n+2}
    hypothesis_ok: bool
    path: str

    def to_dict(self) -> dict:
        return {
            "names": self.names,
            "Lambda0": {k: _num(v) for k, v in self.Lambda0.items()},
            "V_vector": [_num(v) for v in self.V_vector],
            "jacobian": [[_num(v) for v in row] for row in self.jacobian],
            "det": _num(self.det),
            "V_next": _num(self.V_next),
            "hypothesis_ok": self.hypothesis_ok,
            "path": self.path,
        }


def determinant(rows):
    """Gaussian elimination with partial pivoting on any ordered field elements."""
    m = [list(r) for r in rows]
    n = len(m)
    det = m[0][0] * 0 + 1 if n else 1
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(m[r][c]))
        if m[piv][c] == 0:
            return det * 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        for r in range(c + 1, n):
            factor = m[r][c] / m[c][c]
            for cc in range(c, n):
                m[r][cc] = m[r][cc] - factor * m[c][cc]
    return det


def degenerate_hopf_check(family: FamilySpec, Lambda0: dict, n: int, h=None,
                          names: list | None = None) -> DegenerateHopfReport:
    """Check ``V_2 = ... = V_2n = 0``, ``det D(V_2, ..., V_2n) != 0`` and ``V_{2n+2} != 0``."""
    names = list(names) if names is not None else [k for k in Lambda0 if k in family.sweep] or list(Lambda0)
    if len(names) != n:
        raise ValueError(f"need exactly {n} parameter names, got {names}")
    base = eval_lyapunov_at(family, Lambda0, 2 * n + 2)
    field = base.field
    V_vec = [base.V[2 * i] for i in range(1, n + 1)]
    V_next = base.V[2 * n + 2]
    jac_cols = []
    for name in names:
        value = Lambda0[name]
        step = h if h is not None else _default_step(value, family.digits)
        if not field.exact:
            value, step = field.convert(value), field.convert(step)

        def vec(v, name=name):
            V = eval_V_at(family, {**Lambda0, name: v}, 2 * n)
            return [V[2 * i] for i in range(1, n + 1)]

        col_h = [(a - b) / (2 * step) for a, b in zip(vec(value + step), vec(value - step))]
        half = step / 2
        col_half = [(a - b) / (2 * half) for a, b in zip(vec(value + half), vec(value - half))]
        jac_cols.append([(4 * b - a) / 3 for a, b in zip(col_h, col_half)])
    jac = [[jac_cols[j][i] for j in range(n)] for i in range(n)]
    det = determinant(jac)
    scale = max([abs(v) for v in base.alpha_plus + base.alpha_minus] + [1])
    vanish = all(field.is_zero(v, scale) for v in V_vec)
    ok = bool(vanish and not field.is_zero(det) and not field.is_zero(V_next, scale))
    return DegenerateHopfReport(names, dict(Lambda0), V_vec, jac, det, V_next, ok, base.path)


# ---------------------------------------------------------------------------
# numerics and sweeps
# ---------------------------------------------------------------------------

def count_cycles_numeric(family: FamilySpec, point: dict, x_range, cfg: IntegratorConfig | None = None,
                         n_samples: int = 40) -> tuple[int, CycleReport]:
    pf = family.bind(point)
    report = find_cycles(pf, x_range, n_samples, cfg)
    return len(report.cycles), report


def sweep_csv(family: FamilySpec, points, n_max: int) -> str:
    """CSV rows ``(parameters..., V_2..V_n_max)`` in the given point order."""
    points = list(points)
    names = sorted({k for p in points for k in p})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names + [f"V_{n}" for n in range(2, n_max + 1)])
    for p in points:
        res = eval_lyapunov_at(family, p, n_max)
        writer.writerow([_num(p.get(k, "")) for k in names] + [res.field.format(res.V[n]) for n in range(2, n_max + 1)])
    return buf.getvalue()


def report_json(reports) -> str:
    if isinstance(reports, list):
        return json.dumps([r.to_dict() for r in reports], indent=2)
    return json.dumps(reports.to_dict(), indent=2)
