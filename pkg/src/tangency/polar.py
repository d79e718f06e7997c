"""Generalized trigonometric functions and the polar form of a half field.

``Cs`` and ``Sn`` solve ``Cs' = -Sn^(2p-1)``, ``Sn' = Cs^(2q-1)`` with
``Cs(0) = p^(-1/(2q))``, ``Sn(0) = 0``.  With ``(x, y) = (R^p Cs, R^q Sn)``,
``p = 1`` and ``q = 2k`` a canonical half field becomes a regular equation
``dR/dtheta = G/F`` on ``[0, T/2]`` whenever ``s*a < 0``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .canonical import CanonicalForm
from .errors import QuadratureFailure, VanishingF

__all__ = ["GenTrig", "gen_trig", "period", "polar_rhs", "PolarHalf", "polar_half", "trig_table_csv"]


def period(p: int, q: int, tol: float = 1e-12) -> float:
    """``T = 2 p^(-1/2q) q^(-1/2p) int_0^1 (1-s)^((1-2p)/2p) s^((1-2q)/2q) ds``.

    The endpoint singularities are algebraic, so the integral is handed to
    QUADPACK's algebraic-weight rule (QAWS) with a constant integrand.
    """
    alpha = (1 - 2 * q) / (2 * q)      # exponent at s = 0
    beta = (1 - 2 * p) / (2 * p)       # exponent at s = 1
    value, err = quad(lambda s: 1.0, 0.0, 1.0, weight="alg", wvar=(alpha, beta),
                      epsabs=tol * 1e-2, epsrel=tol * 1e-2, full_output=False)
    if not np.isfinite(value) or err > tol:
        raise QuadratureFailure(f"period integral error estimate {err:.3g} exceeds tol {tol:.3g}")
    return 2 * p ** (-1 / (2 * q)) * q ** (-1 / (2 * p)) * value


@dataclass(frozen=True)
class GenTrig:
    """Dense ``Cs``/``Sn`` on ``[-T/2, T/2]``, integrated separately on each half."""

    p: int
    q: int
    T: float
    tol: float
    _forward: object
    _backward: object

    def _solution(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(np.abs(theta) > self.T / 2 * (1 + 1e-12)):
            raise ValueError("theta outside [-T/2, T/2]")
        out = np.empty((2,) + theta.shape)
        pos = theta >= 0
        if np.any(pos):
            out[:, pos] = self._forward(theta[pos])
        if np.any(~pos):
            out[:, ~pos] = self._backward(theta[~pos])
        return out

    def cs(self, theta):
        return self._solution(theta)[0]

    def sn(self, theta):
        return self._solution(theta)[1]

    def __call__(self, theta):
        cs, sn = self._solution(theta)
        return cs, sn

    def identity_residual(self, theta) -> np.ndarray:
        cs, sn = self(theta)
        return self.p * cs ** (2 * self.q) + self.q * sn ** (2 * self.p) - 1

    def grid(self, n: int = 201) -> np.ndarray:
        return np.linspace(-self.T / 2, self.T / 2, n)


def gen_trig(p: int = 1, q: int = 1, tol: float = 1e-12) -> GenTrig:
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive integers")
    if tol <= 0:
        raise ValueError("tol must be positive")
    T = period(p, q, tol)

    def rhs(_, z):
        return [-z[1] ** (2 * p - 1), z[0] ** (2 * q - 1)]

    start = [p ** (-1 / (2 * q)), 0.0]
    rtol = max(tol * 1e-2, 2.5e-14)
    sols = []
    for end in (T / 2, -T / 2):
        sol = solve_ivp(rhs, (0.0, end), start, method="DOP853", dense_output=True,
                        rtol=rtol, atol=rtol * 1e-1)
        if not sol.success:
            raise QuadratureFailure(f"Cauchy problem integration failed: {sol.message}")
        sols.append(sol.sol)
    return GenTrig(p, q, T, tol, sols[0], sols[1])


def cs_zero(trig: GenTrig) -> float:
    """Root of ``Cs`` in ``(0, T/2)``; equals ``T/4``."""
    return brentq(trig.cs, trig.T / 8, trig.T / 2 * 0.999, xtol=trig.tol * 1e-2)


# ---------------------------------------------------------------------------
# polar form of a canonical half field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarHalf:
    """Upper-half-plane problem ``(s, a x^(2k-1) + x^(2k) f + y g)`` with ``s*a < 0``.

    ``mirror_y`` records whether the original orbit lives in ``y < 0`` and was
    reflected; ``mirror_x`` whether ``x0 < 0`` was mapped to ``-x0``.
    """

    k: int
    s: int
    a: float
    f: tuple
    g: tuple            # ((i, j, coeff), ...)
    mirror_x: bool
    mirror_y: bool

    def f_at(self, x):
        acc = 0.0
        for c in reversed(self.f):
            acc = acc * x + c
        return acc

    def g_at(self, x, y):
        return sum(c * x ** i * y ** j for i, j, c in self.g)


def polar_half(canon: CanonicalForm, side: str, x_sign: int = 1) -> PolarHalf:
    """Reduce one canonical half to the standard problem for ``x0`` of sign ``x_sign``."""
    h = canon.half(side)
    to_float = canon.field.to_float
    s, a = h.s, to_float(h.a)
    f = [to_float(c) for c in h.f.coeffs]
    g = [(i, j, to_float(c)) for (i, j), c in h.g.terms() if c != 0]
    mirror_x = x_sign < 0
    if mirror_x:
        # x -> -x: s, a change sign; f(x) -> f(-x); g(x, y) -> g(-x, y)
        s, a = -s, -a
        f = [c * (-1) ** i for i, c in enumerate(f)]
        g = [(i, j, c * (-1) ** i) for i, j, c in g]
    mirror_y = s * a > 0
    if mirror_y:
        # y -> -y: a, f change sign; g(x, y) -> g(x, -y)
        a = -a
        f = [-c for c in f]
        g = [(i, j, c * (-1) ** j) for i, j, c in g]
    return PolarHalf(h.k, s, a, tuple(f), tuple(g), mirror_x, mirror_y)


def polar_rhs(canon: CanonicalForm, side: str, trig: GenTrig | None = None,
              guard: float = 1e-12, x_sign: int = 1):
    """``(R, theta) -> (F, G)`` for the polar system of one half field.

    ``theta' = F`` and ``R' = G`` after rescaling time by ``R``.
    """
    ph = polar_half(canon, side, x_sign)
    k, s, a = ph.k, ph.s, ph.a
    if trig is None:
        trig = gen_trig(1, 2 * k)
    elif (trig.p, trig.q) != (1, 2 * k):
        raise ValueError(f"need generalized trig functions with p=1, q={2 * k}")

    def rhs(R, theta):
        cs, sn = trig(theta)
        cs, sn = float(cs), float(sn)
        x, y = R * cs, R ** (2 * k) * sn
        inner = sn * ph.g_at(x, y) + cs ** (2 * k) * ph.f_at(x)
        F = a * cs ** (2 * k) - 2 * s * k * sn + R * cs * inner
        G = R * cs ** (2 * k - 1) * (s * cs ** (2 * k) + a * sn) + R ** 2 * sn * inner
        if abs(F) < guard:
            raise VanishingF(f"|F| = {abs(F):.3g} at R={R:.6g}, theta={theta:.6g}")
        return F, G

    rhs.half = ph
    rhs.trig = trig
    return rhs


def polar_return(canon: CanonicalForm, side: str, x0: float, rtol: float = 1e-12,
                 atol: float = 1e-14, trig: GenTrig | None = None) -> float:
    """Half-return map through the polar equation ``dR/dtheta = G/F``."""
    if x0 == 0:
        return 0.0
    x_sign = 1 if x0 > 0 else -1
    rhs = polar_rhs(canon, side, trig, x_sign=x_sign)
    trig = rhs.trig

    def dr(theta, z):
        F, G = rhs(z[0], theta)
        return [G / F]

    sol = solve_ivp(dr, (0.0, trig.T / 2), [abs(x0)], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise VanishingF(f"polar integration failed: {sol.message}")
    x_end = sol.y[0, -1] * float(trig.cs(trig.T / 2))
    return x_sign * x_end


def trig_table_csv(trig: GenTrig, n: int = 201) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "Cs", "Sn"])
    theta = trig.grid(n)
    cs, sn = trig(theta)
    for row in zip(theta, cs, sn):
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
