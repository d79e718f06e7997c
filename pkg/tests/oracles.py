"""Independent reference computations used by the tests.

Nothing here touches the package's series engine or recursion.  Polynomials
are plain ``dict``s ``{(i, j): Fraction}``; univariate series are lists.
"""

from __future__ import annotations

import math
from fractions import Fraction


# -- bivariate dict polynomials truncated at total degree D --------------------

def bmul(p, q, D):
    out = {}
    for (i1, j1), a in p.items():
        for (i2, j2), b in q.items():
            if i1 + i2 + j1 + j2 <= D:
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + a * b
    return {k: v for k, v in out.items() if v}


def badd(p, q, c=1):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v}


def bpow(p, e, D):
    out = {(0, 0): Fraction(1)}
    for _ in range(e):
        out = bmul(out, p, D)
    return out


def bsubst(poly, xs, ys, D):
    """``poly(xs(t,u), ys(t,u))`` for dict polynomials ``xs``, ``ys``."""
    out = {}
    cache_x, cache_y = {}, {}
    for (i, j), c in poly.items():
        if i not in cache_x:
            cache_x[i] = bpow(xs, i, D)
        if j not in cache_y:
            cache_y[j] = bpow(ys, j, D)
        out = badd(out, bmul(cache_x[i], cache_y[j], D), c)
    return out


def eta_expansion(X, Y, s, D):
    """``s*Y/X`` as a dict polynomial in ``(x, y)`` through total degree ``D``."""
    X = {k: Fraction(v) for k, v in X.items()}
    x00 = X[(0, 0)]
    w = {k: v / x00 for k, v in X.items() if k != (0, 0)}
    inv = {(0, 0): Fraction(1)}
    term = {(0, 0): Fraction(1)}
    for _ in range(D):
        term = bmul(term, {k: -v for k, v in w.items()}, D)
        inv = badd(inv, term)
    inv = {k: v / x00 for k, v in inv.items()}
    return {k: s * v for k, v in bmul({k: Fraction(v) for k, v in Y.items()}, inv, D).items()}


# -- univariate lists -------------------------------------------------------------

def umul(a, b, n):
    out = [Fraction(0)] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                out[i + j] += x * y
    return out


def ucompose(outer, inner, n):
    """``outer(inner(u))`` with ``inner(0) = 0``."""
    assert inner[0] == 0
    out = [Fraction(0)] * (n + 1)
    power = [Fraction(1)] + [Fraction(0)] * n
    for c in outer[: n + 1]:
        out = [o + c * p for o, p in zip(out, power)]
        power = umul(power, inner, n)
    return out


def upow_rational(w, r, n):
    """``(1 + w(u))^r`` for ``w(0) = 0`` via the binomial series."""
    coeffs, c = [], Fraction(1)
    for m in range(n + 1):
        coeffs.append(c)
        c = c * (r - m) / (m + 1)
    return ucompose(coeffs, w, n)


def urevert(p, n):
    """Compositional inverse of ``p(u) = u + ...``."""
    inv = [Fraction(0), Fraction(1)] + [Fraction(0)] * (n - 1)
    for m in range(2, n + 1):
        err = ucompose(p, inv, n)
        inv[m] -= err[m]
    return inv


# -- the flow oracle ----------------------------------------------------------------

def flow_mu(X, Y, s, D):
    """``mu(u) = y(-s u, u)`` for the orbit of ``(s, s*Y/X)`` from ``(u, 0)``.

    The orbit ``y(t, u)`` is obtained by Picard iteration in the two variables.
    """
    eta = eta_expansion(X, Y, s, D)
    xs = {(0, 1): Fraction(1), (1, 0): Fraction(s)}      # x = u + s t, keys (t, u)
    y = {}
    for _ in range(D + 1):
        rhs = bsubst(eta, xs, y, D)
        y = {(i + 1, j): c / (i + 1) for (i, j), c in rhs.items() if i + 1 + j <= D}
    mu = [Fraction(0)] * (D + 1)
    for (i, j), c in y.items():
        mu[i + j] += c * (-s) ** i
    return mu


def flow_alpha(X, Y, s, k, n_max):
    """``alpha_1..alpha_n_max`` of the half-return map by series reversion."""
    D = n_max + 2 * k - 1
    mu = flow_mu(X, Y, s, D)
    lead = mu[2 * k]
    n = D - 2 * k
    w = [Fraction(0)] + [mu[2 * k + i] / lead for i in range(1, n + 1)]
    root = upow_rational(w, Fraction(1, 2 * k), n)
    psi = [Fraction(0)] + root[: n + 1]                     # u * (1 + w)^(1/2k)
    inv = urevert(psi, n + 1)
    phi = ucompose(inv, [-c for c in psi], n + 1)
    return mu, phi[1:n_max + 1]


def half_data(pf, side):
    """Exact ``(X, Y, s, k)`` for one half of a rational field."""
    vf = pf.half(side)
    X = {k: Fraction(v) for k, v in vf.X.terms.items()}
    Y = {k: Fraction(v) for k, v in vf.Y.terms.items()}
    x00 = X[(0, 0)]
    s = 1 if x00 > 0 else -1
    k = (min(i for (i, j), c in Y.items() if j == 0 and c) + 1) // 2
    return X, Y, s, k


def partial_bell_bruteforce(n, k, xs):
    """``B_{n,k}`` from the set-partition definition (small ``n`` only)."""
    total = Fraction(0)

    def partitions(elements):
        if not elements:
            yield []
            return
        first, rest = elements[0], elements[1:]
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1:]
            yield [[first]] + part

    for part in partitions(list(range(n))):
        if len(part) == k:
            term = Fraction(1)
            for block in part:
                term *= xs[len(block) - 1]
            total += term
    return total


def ordinary_bell_bruteforce(p, q, xs):
    """Coefficient of ``t^p`` in ``(sum_j xs[j-1] t^j)^q`` by repeated multiplication."""
    poly = [Fraction(0)] + [Fraction(x) for x in xs]
    out = [Fraction(1)]
    for _ in range(q):
        new = [Fraction(0)] * (len(out) + len(poly) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(poly):
                new[i + j] += a * b
        out = new
    return out[p] if p < len(out) else Fraction(0)


def factorial(n):
    return math.factorial(n)
