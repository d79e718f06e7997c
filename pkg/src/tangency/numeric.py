"""Numerical half-return maps, displacement and limit cycles.

Each half field is integrated as an ordinary polynomial vector field from
``(x0, 0)`` until the orbit meets ``y = 0`` again.  The time direction is
chosen so that ``x`` first moves toward the tangency point.  This is an
oracle for the series computations, so it always works on floating-point
images of the exact coefficients.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field as dc_field, replace

import mpmath
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DegenerateCrossing, NoReturn, VanishingF
from .model import PiecewiseField, classify

__all__ = [
    "IntegratorConfig", "NumericReturnData", "CycleReport", "half_return", "displacement",
    "return_table", "find_cycles", "series_agreement", "SeriesAgreement",
]

METHODS = ("dop853", "taylor", "taylor-fixed")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "dop853"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_steps: int = 100_000
    event_tol: float = 1e-10
    polar_threshold: float = 0.0
    t_max: float = 1e3
    box: float = 10.0
    digits: int = 40              # working precision of the Taylor integrators
    fixed_step: float = 1e-2      # step of the fixed-step Taylor cross-check

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("abs_tol", "rel_tol", "event_tol", "t_max", "box", "fixed_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.polar_threshold < 0:
            raise ValueError("polar_threshold must be nonnegative")

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# polynomial evaluation
# ---------------------------------------------------------------------------

def _float_terms(poly):
    return [(float(c), i, j) for c, i, j in poly.float_terms()]


def _poly_eval(terms, x, y):
    return sum(c * x ** i * y ** j for c, i, j in terms)


def _direction(pf: PiecewiseField, side: str, x0) -> int:
    vf = pf.half(side)
    x_speed = float(vf.X(float(x0), 0.0))
    if x_speed == 0:
        raise DegenerateCrossing(f"X vanishes at ({x0}, 0)")
    return -1 if x_speed * float(x0) > 0 else 1


# ---------------------------------------------------------------------------
# adaptive Dormand-Prince 8(5,3) with event location
# ---------------------------------------------------------------------------

def _return_dop853(pf, side, x0, cfg):
    vf = pf.half(side)
    X, Y = _float_terms(vf.X), _float_terms(vf.Y)
    x0 = float(x0)
    t_dir = _direction(pf, side, x0)

    def rhs(_, z):
        return [_poly_eval(X, z[0], z[1]), _poly_eval(Y, z[0], z[1])]

    y_speed = _poly_eval(Y, x0, 0.0) * t_dir
    if y_speed == 0:
        raise DegenerateCrossing(f"orbit through ({x0}, 0) is tangent to y = 0")
    leave = 1 if y_speed > 0 else -1

    def hit(_, z):
        return z[1]
    hit.terminal = True
    # leaving the line is an upward crossing when leave > 0; only the return counts
    hit.direction = -leave

    def escape(_, z):
        return cfg.box - max(abs(z[0]), abs(z[1]))
    escape.terminal = True

    sol = solve_ivp(rhs, (0.0, t_dir * cfg.t_max), [x0, 0.0], method="DOP853",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol, events=(hit, escape))
    if sol.status == 1 and len(sol.t_events[0]):
        x_end = _polish(rhs, x0, float(sol.t_events[0][0]), cfg)
        _check_crossing(Y, x_end, cfg)
        return x_end
    raise NoReturn(f"{side} orbit from x0={x0:g} did not return to y=0 "
                   f"({'left the box' if sol.status == 1 else sol.message})")


def _polish(rhs, x0, t_hit, cfg, max_iter=4):
    """Refine an event found on the dense output.

    The interpolant has no error control, so the crossing is recomputed by
    integrating to ``t_hit`` and applying Newton steps on ``y(t) = 0``.
    """
    def advance(z, t):
        out = solve_ivp(rhs, (0.0, t), z, method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol)
        return out.y[:, -1]

    z = advance([x0, 0.0], t_hit)
    for _ in range(max_iter):
        dy = rhs(0.0, z)[1]
        if dy == 0:
            break
        dt = -z[1] / dy
        if dt == 0 or abs(dt) <= 1e-3 * cfg.abs_tol * max(1.0, abs(t_hit)):
            break
        z = advance(z, dt)
    return float(z[0])


def _check_crossing(Y, x_end, cfg):
    # Newton distance to the nearest zero of Y(., 0); |Y| alone is tiny near
    # a high-order contact even for clean transversal crossings
    value = _poly_eval(Y, x_end, 0.0)
    slope = sum(c * i * x_end ** (i - 1) for c, i, j in Y if j == 0 and i > 0)
    if value == 0 or (slope != 0 and abs(value / slope) <= cfg.event_tol):
        raise DegenerateCrossing(f"return point x={x_end:g} is (nearly) tangent to y = 0")


# ---------------------------------------------------------------------------
# Taylor series integrator in arbitrary precision
# ---------------------------------------------------------------------------

class _TaylorField:
    """Taylor coefficients of the solution of a polynomial field."""

    def __init__(self, vf, ctx, t_dir):
        def conv(c):
            if hasattr(c, "numerator") and hasattr(c, "denominator"):
                return ctx.mpf(c.numerator) / c.denominator
            return ctx.mpf(c)
        self.ctx = ctx
        self.X = [(conv(c) * t_dir, i, j) for (i, j), c in vf.X.terms.items()]
        self.Y = [(conv(c) * t_dir, i, j) for (i, j), c in vf.Y.terms.items()]
        self.max_i = max([i for _, i, _ in self.X + self.Y] + [0])
        self.max_j = max([j for _, _, j in self.X + self.Y] + [0])

    def coefficients(self, x0, y0, order):
        ctx = self.ctx
        one, zero = ctx.mpf(1), ctx.mpf(0)
        xs, ys = [x0], [y0]
        px = [[one] + [zero] * order] + [[] for _ in range(self.max_i)]
        py = [[one] + [zero] * order] + [[] for _ in range(self.max_j)]

        def extend(powers, base, n):
            for e in range(1, len(powers)):
                prev = powers[e - 1]
                powers[e].append(ctx.fsum(base[m] * prev[n - m] for m in range(n + 1)))

        for n in range(order):
            extend(px, xs, n)
            extend(py, ys, n)

            def comp(terms):
                return ctx.fsum(c * ctx.fsum(px[i][m] * py[j][n - m] for m in range(n + 1))
                                for c, i, j in terms)
            xs.append(comp(self.X) / (n + 1))
            ys.append(comp(self.Y) / (n + 1))
        return xs, ys


def _horner(ctx, coeffs, t):
    acc = ctx.mpf(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _bisect(ctx, fn, lo, hi, tol, max_iter=400):
    f_lo = fn(lo)
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        f_mid = fn(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return (lo + hi) / 2


def _return_taylor(pf, side, x0, cfg, fixed: bool):
    ctx = mpmath.MPContext()
    ctx.dps = cfg.digits
    vf = pf.half(side)
    t_dir = _direction(pf, side, x0)
    tf = _TaylorField(vf, ctx, t_dir)
    if hasattr(x0, "numerator") and hasattr(x0, "denominator"):
        x = ctx.mpf(x0.numerator) / x0.denominator
    else:
        x = ctx.mpf(x0)
    y = ctx.mpf(0)
    order = max(12, int(math.ceil(-math.log(cfg.abs_tol) / 2)) + 2)
    time_tol = ctx.mpf(10) ** (-(cfg.digits - 5))
    leave = None
    for _ in range(cfg.max_steps):
        xs, ys = tf.coefficients(x, y, order)
        if fixed:
            h = ctx.mpf(cfg.fixed_step)
        else:
            rho = min(_radius(ctx, cs, order) for cs in (xs, ys))
            h = rho / ctx.e ** 2
        if leave is None:
            # y = t * (ys[1] + ys[2] t + ...): the start point is not a crossing
            q = ys[1:]
            lead = next((c for c in q if c != 0), None)
            if lead is None:
                raise DegenerateCrossing(f"orbit through ({x0}, 0) stays on y = 0")
            if ys[1] == 0:
                raise DegenerateCrossing(f"orbit through ({x0}, 0) is tangent to y = 0")
            leave = 1 if ys[1] > 0 else -1
        else:
            q = ys
        fn = lambda t: _horner(ctx, q, t)
        samples = 24
        prev = ctx.mpf(0)
        crossing = None
        for m in range(1, samples + 1):
            t = h * m / samples
            if (fn(t) > 0) != (leave > 0) or fn(t) == 0:
                crossing = (prev, t)
                break
            prev = t
        if crossing is not None:
            t_star = _bisect(ctx, fn, crossing[0], crossing[1], time_tol * h)
            x_end = _horner(ctx, xs, t_star)
            if abs(_horner(ctx, [c * n for n, c in enumerate(ys)][1:], t_star)) <= cfg.event_tol ** 2:
                raise DegenerateCrossing(f"return point x={x_end} is tangent to y = 0")
            return x_end
        x, y = _horner(ctx, xs, h), _horner(ctx, ys, h)
        if abs(x) > cfg.box or abs(y) > cfg.box:
            raise NoReturn(f"{side} orbit from x0={x0} left the box |x|,|y| <= {cfg.box}")
    raise NoReturn(f"{side} orbit from x0={x0} did not return within {cfg.max_steps} steps")


def _radius(ctx, coeffs, order):
    est = []
    for j in (order - 1, order):
        c = abs(coeffs[j])
        if c != 0:
            est.append(c ** (-ctx.mpf(1) / j))
    return min(est) if est else ctx.mpf(1)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def half_return(pf: PiecewiseField, side: str, x0, cfg: IntegratorConfig | None = None, canon=None):
    """Next intersection with ``y = 0`` of the ``side`` orbit through ``(x0, 0)``."""
    cfg = cfg or IntegratorConfig()
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    if x0 == 0:
        raise ValueError("x0 must be nonzero")
    if cfg.method == "dop853":
        if abs(float(x0)) < cfg.polar_threshold:
            from .canonical import canonical_form
            from .polar import polar_return
            try:
                canon = canon or canonical_form(pf, 24)
                return polar_return(canon, side, float(x0), cfg.rel_tol, cfg.abs_tol)
            except VanishingF:
                pass
        return _return_dop853(pf, side, x0, cfg)
    return _return_taylor(pf, side, x0, cfg, fixed=cfg.method == "taylor-fixed")


def displacement(pf: PiecewiseField, x0, cfg: IntegratorConfig | None = None, delta: int | None = None):
    """``delta * (phi+(x0) - phi-(x0))``."""
    if delta is None:
        delta = classify(pf).delta
    return delta * (half_return(pf, "upper", x0, cfg) - half_return(pf, "lower", x0, cfg))


@dataclass
class NumericReturnData:
    x0: list
    phi_plus: list
    phi_minus: list
    displacement: list
    delta: int
    cycles: list = dc_field(default_factory=list)
    failures: dict = dc_field(default_factory=dict)   # index -> message

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x0", "phi_plus", "phi_minus", "displacement"])
        for n, row in enumerate(zip(self.x0, self.phi_plus, self.phi_minus, self.displacement)):
            if n in self.failures:
                writer.writerow([_fmt(row[0]), "", "", "", ])
            else:
                writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for n, row in enumerate(zip(self.x0, self.phi_plus, self.phi_minus, self.displacement)):
            entry = dict(zip(("x0", "phi_plus", "phi_minus", "displacement"),
                             [_fmt(row[0])] + ([None] * 3 if n in self.failures else [_fmt(v) for v in row[1:]])))
            if n in self.failures:
                entry["error"] = self.failures[n]
            rows.append(entry)
        return json.dumps({"delta": self.delta, "rows": rows,
                           "cycles": [{"x": _fmt(x), "stability": s} for x, s in self.cycles]}, indent=2)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return mpmath.nstr(v, 20) if isinstance(v, mpmath.mpf) or hasattr(v, "ae") else str(v)


def return_table(pf: PiecewiseField, xs, cfg: IntegratorConfig | None = None) -> NumericReturnData:
    cfg = cfg or IntegratorConfig()
    delta = classify(pf).delta
    plus, minus, disp, failures = [], [], [], {}
    for n, x0 in enumerate(xs):
        try:
            p = half_return(pf, "upper", x0, cfg)
            m = half_return(pf, "lower", x0, cfg)
        except (NoReturn, DegenerateCrossing) as exc:
            failures[n] = str(exc)
            p = m = None
        plus.append(p)
        minus.append(m)
        disp.append(None if p is None else delta * (p - m))
    return NumericReturnData(list(xs), plus, minus, disp, delta, failures=failures)


@dataclass
class CycleReport:
    cycles: list                  # (x*, "stable" | "unstable")
    annotation: str | None
    data: NumericReturnData

    def to_dict(self) -> dict:
        return {"cycles": [{"x": float(x), "stability": s} for x, s in self.cycles],
                "annotation": self.annotation}


def find_cycles(pf: PiecewiseField, x_range, n_samples: int = 40,
                cfg: IntegratorConfig | None = None) -> CycleReport:
    """Roots of the displacement on ``x_range`` located by bracketing and Brent's method."""
    cfg = cfg or IntegratorConfig(method="dop853")
    lo, hi = (float(v) for v in x_range)
    if not 0 < lo < hi and not lo < hi < 0:
        raise ValueError("x_range must be an interval on one side of 0")
    xs = list(np.linspace(lo, hi, n_samples))
    data = return_table(pf, xs, cfg)
    if data.failures:
        raise NoReturn(f"no return for x0 = {xs[min(data.failures)]:g}: {data.failures[min(data.failures)]}")
    d = [float(v) for v in data.displacement]
    noise = 10 * cfg.event_tol
    if max(abs(v) for v in d) <= noise:
        report = CycleReport([], "no isolated roots: displacement below noise floor (possible center)", data)
        data.cycles = []
        return report
    delta = data.delta
    fn = lambda x: float(displacement(pf, x, cfg, delta))
    cycles = []
    for a, b, da, db in zip(xs, xs[1:], d, d[1:]):
        if abs(da) <= noise or abs(db) <= noise:
            continue
        if (da > 0) != (db > 0):
            root = brentq(fn, a, b, xtol=cfg.event_tol)
            if cycles and abs(root - cycles[-1][0]) <= 10 * cfg.event_tol:
                continue
            cycles.append((root, "stable" if da > 0 > db else "unstable"))
    data.cycles = cycles
    return CycleReport(cycles, None, data)


# ---------------------------------------------------------------------------
# series versus integration
# ---------------------------------------------------------------------------

@dataclass
class SeriesAgreement:
    side: str
    order: int
    x0: list
    residuals: list
    slope: float

    def rows(self):
        for x, r in zip(self.x0, self.residuals):
            yield float(x), float(r)


def series_agreement(pf: PiecewiseField, side: str, alphas, xs,
                     cfg: IntegratorConfig | None = None) -> SeriesAgreement:
    """Residuals ``|phi_num(x0) - sum_{n<=N} alpha_n x0^n|`` and their log-log slope.

    Defaults to the Taylor integrator at 45 digits: the residuals of a
    sixth-order truncation at ``x0 = 2^-9`` are far below double precision.
    """
    cfg = cfg or IntegratorConfig(method="taylor", abs_tol=1e-34, digits=45)
    ctx = mpmath.MPContext()
    ctx.dps = cfg.digits if cfg.method != "dop853" else 17

    def conv(v):
        if hasattr(v, "numerator") and hasattr(v, "denominator"):
            return ctx.mpf(v.numerator) / v.denominator
        return ctx.mpf(v)

    coeffs = [conv(a) for a in alphas]
    residuals = []
    for x0 in xs:
        x = conv(x0)
        num = conv(half_return(pf, side, x0, cfg))
        series = ctx.fsum(c * x ** n for n, c in enumerate(coeffs, start=1))
        residuals.append(abs(num - series))
    logs_x = np.array([float(ctx.log(abs(conv(x)))) for x in xs])
    logs_r = np.array([float(ctx.log(r)) if r > 0 else -np.inf for r in residuals])
    finite = np.isfinite(logs_r)
    slope = float(np.polyfit(logs_x[finite], logs_r[finite], 1)[0]) if finite.sum() >= 2 else float("nan")
    return SeriesAgreement(side, len(coeffs), list(xs), residuals, slope)
