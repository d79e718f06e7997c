"""Partial and ordinary Bell polynomials evaluated on concrete arguments.

The arguments may be any ring elements supporting ``+``, ``*`` and
multiplication by Python ints: ``Fraction``, mpmath numbers, or
:class:`~tangency.exact.UniSeries`.

Index tuples ``(b_1, ..., b_{p-q+1})`` with ``sum j*b_j = p`` and
``sum b_j = q`` are enumerated once per ``(p, q)`` and cached.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

from .errors import BadArity

__all__ = ["bell_tuples", "partial_bell", "ordinary_bell"]


@lru_cache(maxsize=None)
def bell_tuples(p: int, q: int) -> tuple[tuple[int, ...], ...]:
    """All ``(b_1..b_{p-q+1})`` with ``sum j b_j = p`` and ``sum b_j = q``."""
    if not 1 <= q <= p:
        raise ValueError(f"need 1 <= q <= p, got p={p}, q={q}")
    width = p - q + 1
    found = []
    b = [0] * width

    def place(j, weight_left, count_left):
        # j runs from width down to 1; b_j for larger j chosen first
        if j == 0:
            if weight_left == 0 and count_left == 0:
                found.append(tuple(b))
            return
        for bj in range(min(weight_left // j, count_left), -1, -1):
            w = weight_left - bj * j
            c = count_left - bj
            # c parts of sizes 1..j-1 must add up to w
            if not c <= w <= c * (j - 1):
                continue
            b[j - 1] = bj
            place(j - 1, w, c)
        b[j - 1] = 0

    place(width, p, q)
    return tuple(sorted(found))


@lru_cache(maxsize=None)
def _partial_weights(p: int, q: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    out = []
    for b in bell_tuples(p, q):
        den = 1
        for j, bj in enumerate(b, start=1):
            den *= math.factorial(bj) * math.factorial(j) ** bj
        out.append((b, math.factorial(p) // den))
    return tuple(out)


@lru_cache(maxsize=None)
def _ordinary_weights(p: int, q: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    out = []
    for b in bell_tuples(p, q):
        den = 1
        for bj in b:
            den *= math.factorial(bj)
        out.append((b, math.factorial(q) // den))
    return tuple(out)


def _check(p, q, xs):
    if not 1 <= q <= p:
        raise ValueError(f"need 1 <= q <= p, got p={p}, q={q}")
    if len(xs) != p - q + 1:
        raise BadArity(f"B_{{{p},{q}}} takes {p - q + 1} arguments, got {len(xs)}")


def _evaluate(weighted, xs):
    powers: dict[tuple[int, int], object] = {}

    def power(j, e):
        key = (j, e)
        if key not in powers:
            powers[key] = xs[j] if e == 1 else power(j, e - 1) * xs[j]
        return powers[key]

    total = None
    for b, w in weighted:
        term = None
        for j, bj in enumerate(b):
            if bj:
                pw = power(j, bj)
                term = pw if term is None else term * pw
        term = term * w
        total = term if total is None else total + term
    return total


def partial_bell(p: int, q: int, xs: Sequence):
    """Exponential partial Bell polynomial ``B_{p,q}(x_1, ..., x_{p-q+1})``."""
    _check(p, q, xs)
    return _evaluate(_partial_weights(p, q), xs)


def ordinary_bell(p: int, q: int, xs: Sequence):
    """Ordinary Bell polynomial: coefficient of ``t^p`` in ``(sum x_j t^j)^q``.

    Weighted by the multinomial ``q!/(b_1! ... b_{p-q+1}!)``, so that
    ``ordinary_bell(p, q, xs) == q!/p! * partial_bell(p, q, [j! x_j])``.
    """
    _check(p, q, xs)
    return _evaluate(_ordinary_weights(p, q), xs)
