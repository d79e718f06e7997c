"""Coefficient fields and truncated power series.

Two coefficient fields are supported behind the same small interface:
:class:`RationalField` (``fractions.Fraction``, exact) and
:class:`BigFloatField` (an mpmath context with its own precision, so the
working precision is carried by the field object instead of mpmath's global
state).

:class:`UniSeries` and :class:`BiSeries` are immutable truncated series.  Each
carries its truncation order ``N`` meaning "every coefficient of degree ``<= N``
is correct"; operations propagate that bound pessimistically and never extend
it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath

from .errors import DivisionNotExact, NonzeroConstantTerm, OrderBudgetExceeded

__all__ = [
    "RationalField", "BigFloatField", "UniSeries", "BiSeries",
    "series_add", "series_mul", "series_scale", "series_div",
    "series_compose", "series_derivative",
]


# ---------------------------------------------------------------------------
# coefficient fields
# ---------------------------------------------------------------------------

class RationalField:
    """Exact arithmetic on ``Fraction``; zero tests are true equality."""

    name = "rational"
    exact = True
    digits = None

    zero = Fraction(0)
    one = Fraction(1)

    def convert(self, value) -> Fraction:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, bool):
            raise TypeError("booleans are not field elements")
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value.strip())
        raise TypeError(f"cannot represent {value!r} exactly")

    def is_zero(self, value, scale=None) -> bool:
        return value == 0

    def sign(self, value, scale=None) -> int:
        return (value > 0) - (value < 0)

    def to_float(self, value) -> float:
        return float(value)

    def format(self, value) -> str:
        value = Fraction(value)
        return str(value.numerator) if value.denominator == 1 else str(value)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")

    def __repr__(self):
        return "RationalField()"


class BigFloatField:
    """Floating point field with ``digits`` decimal digits.

    Uses a private :class:`mpmath.MPContext`, so two fields with different
    precision can coexist in one process.  ``is_zero`` applies the relative
    threshold ``10**-(digits - 15)``.
    """

    name = "bigfloat"
    exact = False

    def __init__(self, digits: int = 50):
        if digits < 20:
            raise ValueError("BigFloatField needs at least 20 digits")
        self.digits = int(digits)
        self.ctx = mpmath.MPContext()
        self.ctx.dps = self.digits
        self.zero = self.ctx.mpf(0)
        self.one = self.ctx.mpf(1)
        self.eps = self.ctx.mpf(10) ** (-(self.digits - 15))

    def convert(self, value):
        ctx = self.ctx
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, bool):
            raise TypeError("booleans are not field elements")
        if isinstance(value, str):
            text = value.strip()
            if "/" in text:
                return self.convert(Fraction(text))
            return ctx.mpf(text)
        return ctx.mpf(value)

    def is_zero(self, value, scale=None) -> bool:
        bound = self.eps
        if scale is not None:
            bound = bound * max(self.one, abs(self.convert(scale)))
        return abs(value) <= bound

    def sign(self, value, scale=None) -> int:
        if self.is_zero(value, scale):
            return 0
        return 1 if value > 0 else -1

    def to_float(self, value) -> float:
        return float(value)

    def format(self, value) -> str:
        return self.ctx.nstr(value, self.digits)

    def sqrt(self, value):
        return self.ctx.sqrt(self.convert(value))

    def __eq__(self, other):
        return isinstance(other, BigFloatField) and other.digits == self.digits

    def __hash__(self):
        return hash(("bigfloat", self.digits))

    def __repr__(self):
        return f"BigFloatField(digits={self.digits})"


def _exact_zero(value) -> bool:
    return value == 0


# ---------------------------------------------------------------------------
# univariate series
# ---------------------------------------------------------------------------

class UniSeries:
    """``sum c_i x^i + O(x^(order+1))``.

    ``order == -1`` is allowed and means nothing is known (every coefficient
    request raises :class:`OrderBudgetExceeded`).
    """

    __slots__ = ("coeffs", "order", "zero")

    def __init__(self, coeffs: Iterable = (), order: int | None = None, zero=Fraction(0)):
        cs = [zero + c for c in coeffs]
        if order is None:
            order = len(cs) - 1
        order = max(int(order), -1)
        if len(cs) < order + 1:
            cs.extend([zero] * (order + 1 - len(cs)))
        self.coeffs = tuple(cs[: order + 1])
        self.order = order
        self.zero = zero

    # construction helpers
    @classmethod
    def constant(cls, value, order: int, zero=Fraction(0)) -> "UniSeries":
        return cls([value], order, zero)

    @classmethod
    def monomial(cls, coeff, power: int, order: int, zero=Fraction(0)) -> "UniSeries":
        cs = [zero] * (power + 1)
        cs[power] = zero + coeff
        return cls(cs, order, zero)

    def _like(self, coeffs, order) -> "UniSeries":
        return UniSeries(coeffs, order, self.zero)

    # access
    def __getitem__(self, i: int):
        if i < 0:
            raise IndexError(i)
        if i > self.order:
            raise OrderBudgetExceeded(
                f"coefficient x^{i} requested but series is only valid through x^{self.order}")
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def valuation(self, is_zero: Callable = _exact_zero) -> int:
        """Index of the first nonzero coefficient (``order + 1`` if none)."""
        for i, c in enumerate(self.coeffs):
            if not is_zero(c):
                return i
        return self.order + 1

    def is_zero(self, is_zero: Callable = _exact_zero) -> bool:
        return all(is_zero(c) for c in self.coeffs)

    def truncate(self, order: int) -> "UniSeries":
        return self._like(self.coeffs, min(order, self.order))

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, UniSeries):
            return self + self._like([other], self.order)
        n = min(self.order, other.order)
        return self._like([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, UniSeries):
            return self._like([c * other for c in self.coeffs], self.order)
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for m in range(n + 1):
            acc = self.zero
            for i in range(m + 1):
                ai = a[i]
                if ai:
                    bj = b[m - i]
                    if bj:
                        acc += ai * bj
            out.append(acc)
        return self._like(out, n)

    __rmul__ = __mul__

    def scale(self, c) -> "UniSeries":
        return self * c

    def shift(self, m: int) -> "UniSeries":
        """Multiply by ``x**m`` (exact, so validity grows by ``m``)."""
        return self._like([self.zero] * m + list(self.coeffs), self.order + m)

    def unshift(self, m: int, is_zero: Callable = _exact_zero) -> "UniSeries":
        """Divide by ``x**m``; the dropped coefficients must vanish."""
        if m > self.order + 1:
            raise OrderBudgetExceeded(f"cannot cancel x^{m} from series of order {self.order}")
        for i in range(m):
            if not is_zero(self.coeffs[i]):
                raise DivisionNotExact(f"coefficient of x^{i} is {self.coeffs[i]}, expected 0")
        return self._like(self.coeffs[m:], self.order - m)

    def derivative(self, m: int = 1) -> "UniSeries":
        if m < 0:
            raise ValueError("derivative order must be >= 0")
        if m == 0:
            return self
        out = []
        for i in range(m, self.order + 1):
            out.append(self.coeffs[i] * math.perm(i, m))
        return self._like(out, self.order - m)

    def div(self, den: "UniSeries", is_zero: Callable = _exact_zero) -> "UniSeries":
        """Exact quotient; a common factor ``x**v`` is cancelled first."""
        v = den.valuation(is_zero)
        if v > den.order:
            raise ZeroDivisionError("denominator series is zero to its order")
        num = self.unshift(v, is_zero)
        den = den.unshift(v, is_zero)
        n = min(num.order, den.order)
        d0 = den.coeffs[0]
        q = []
        for m in range(n + 1):
            acc = num.coeffs[m]
            for i in range(1, m + 1):
                acc -= den.coeffs[i] * q[m - i]
            q.append(acc / d0)
        return self._like(q, n)

    def __truediv__(self, other):
        if isinstance(other, UniSeries):
            return self.div(other)
        return self._like([c / other for c in self.coeffs], self.order)

    def compose(self, inner: "UniSeries", is_zero: Callable = _exact_zero) -> "UniSeries":
        """``self(inner(x))``, valid through ``min(self.order, inner.order)``."""
        if inner.order >= 0 and not is_zero(inner.coeffs[0]):
            raise NonzeroConstantTerm("inner series must vanish at 0")
        n = min(self.order, inner.order) if inner.order >= 0 else self.order
        if n < 0:
            return self._like([], -1)
        inner = inner.truncate(n)
        acc = self._like([], n)
        for c in reversed(self.coeffs[: n + 1]):
            acc = acc * inner + c
        return acc

    def evaluate(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def map(self, fn) -> "UniSeries":
        return UniSeries([fn(c) for c in self.coeffs], self.order, fn(self.zero))

    # comparison / display
    def agrees_with(self, other: "UniSeries", through: int | None = None,
                    is_zero: Callable = _exact_zero) -> bool:
        n = min(self.order, other.order) if through is None else through
        return all(is_zero(self[i] - other[i]) for i in range(n + 1))

    def __eq__(self, other):
        if not isinstance(other, UniSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        terms = [f"{c}*x^{i}" for i, c in enumerate(self.coeffs) if c != 0]
        body = " + ".join(terms) if terms else "0"
        return f"UniSeries({body} + O(x^{self.order + 1}))"


def series_add(a: UniSeries, b: UniSeries) -> UniSeries:
    return a + b


def series_mul(a: UniSeries, b: UniSeries) -> UniSeries:
    return a * b


def series_scale(a: UniSeries, c) -> UniSeries:
    return a.scale(c)


def series_div(num: UniSeries, den: UniSeries, is_zero: Callable = _exact_zero) -> UniSeries:
    return num.div(den, is_zero)


def series_compose(outer: UniSeries, inner: UniSeries, is_zero: Callable = _exact_zero) -> UniSeries:
    return outer.compose(inner, is_zero)


def series_derivative(s: UniSeries, m: int = 1) -> UniSeries:
    return s.derivative(m)


# ---------------------------------------------------------------------------
# bivariate series, truncated by total degree
# ---------------------------------------------------------------------------

class BiSeries:
    """``sum g_ij x^i y^j + O(|(x, y)|^(order+1))`` stored as ``rows[i][j]``."""

    __slots__ = ("rows", "order", "zero")

    def __init__(self, rows: Sequence[Sequence] = (), order: int = 0, zero=Fraction(0)):
        order = max(int(order), -1)
        out = []
        for i in range(order + 1):
            src = rows[i] if i < len(rows) else ()
            row = [zero + c for c in list(src)[: order - i + 1]]
            row.extend([zero] * (order - i + 1 - len(row)))
            out.append(tuple(row))
        self.rows = tuple(out)
        self.order = order
        self.zero = zero

    @classmethod
    def from_terms(cls, terms, order: int, zero=Fraction(0)) -> "BiSeries":
        """Build from ``{(i, j): coeff}``; terms above ``order`` are dropped."""
        rows = [[zero] * (order - i + 1) for i in range(order + 1)]
        for (i, j), c in dict(terms).items():
            if i + j <= order:
                rows[i][j] = rows[i][j] + c
        return cls(rows, order, zero)

    def _like(self, rows, order) -> "BiSeries":
        return BiSeries(rows, order, self.zero)

    def __getitem__(self, ij):
        i, j = ij
        if i + j > self.order:
            raise OrderBudgetExceeded(
                f"coefficient x^{i} y^{j} requested but series is only valid through total degree {self.order}")
        return self.rows[i][j]

    def terms(self):
        for i, row in enumerate(self.rows):
            for j, c in enumerate(row):
                yield (i, j), c

    def truncate(self, order: int) -> "BiSeries":
        return self._like(self.rows, min(order, self.order))

    def __add__(self, other):
        if not isinstance(other, BiSeries):
            other = BiSeries.from_terms({(0, 0): other}, self.order, self.zero)
        n = min(self.order, other.order)
        return self._like([[self.rows[i][j] + other.rows[i][j] for j in range(n - i + 1)]
                           for i in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return self._like([[-c for c in row] for row in self.rows], self.order)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            return self._like([[c * other for c in row] for row in self.rows], self.order)
        n = min(self.order, other.order)
        out = [[self.zero] * (n - i + 1) for i in range(n + 1)]
        a_terms = [(i, j, c) for (i, j), c in self.terms() if c and i + j <= n]
        b_terms = [(i, j, c) for (i, j), c in other.terms() if c and i + j <= n]
        for i1, j1, c1 in a_terms:
            rem = n - i1 - j1
            for i2, j2, c2 in b_terms:
                if i2 + j2 <= rem:
                    out[i1 + i2][j1 + j2] += c1 * c2
        return self._like(out, n)

    __rmul__ = __mul__

    def scale(self, c) -> "BiSeries":
        return self * c

    def div(self, den: "BiSeries") -> "BiSeries":
        """Quotient by a series with nonzero constant term."""
        d0 = den.rows[0][0] if den.order >= 0 else 0
        if d0 == 0:
            raise DivisionNotExact("bivariate divisor must have a nonzero constant term")
        n = min(self.order, den.order)
        q = [[self.zero] * (n - i + 1) for i in range(n + 1)]
        den_terms = [(i, j, c) for (i, j), c in den.terms() if c and (i or j) and i + j <= n]
        for total in range(n + 1):
            for i in range(total + 1):
                j = total - i
                acc = self.rows[i][j]
                for di, dj, c in den_terms:
                    if di <= i and dj <= j:
                        acc -= c * q[i - di][j - dj]
                q[i][j] = acc / d0
        return self._like(q, n)

    def __truediv__(self, other):
        if isinstance(other, BiSeries):
            return self.div(other)
        return self._like([[c / other for c in row] for row in self.rows], self.order)

    def divide_by_y(self, is_zero: Callable = _exact_zero) -> "BiSeries":
        """Exact division by ``y``; the ``y^0`` column must vanish."""
        for i in range(self.order + 1):
            if not is_zero(self.rows[i][0]):
                raise DivisionNotExact(f"coefficient of x^{i} y^0 is {self.rows[i][0]}, expected 0")
        return self._like([row[1:] for row in self.rows[: self.order]], self.order - 1)

    def y_slice(self, j: int) -> UniSeries:
        """Coefficient of ``y**j`` as a series in ``x`` (order ``N - j``)."""
        n = self.order - j
        return UniSeries([self.rows[i][j] for i in range(n + 1)], n, self.zero)

    def at_y0(self) -> UniSeries:
        return self.y_slice(0)

    def partial(self, dx: int, dy: int) -> "BiSeries":
        n = self.order - dx - dy
        rows = []
        for i in range(n + 1):
            rows.append([self.rows[i + dx][j + dy] * math.perm(i + dx, dx) * math.perm(j + dy, dy)
                         for j in range(n - i + 1)])
        return self._like(rows, n)

    def evaluate(self, x, y):
        acc = 0 * x
        for i in reversed(range(self.order + 1)):
            inner = 0 * y
            for c in reversed(self.rows[i]):
                inner = inner * y + c
            acc = acc * x + inner
        return acc

    def map(self, fn) -> "BiSeries":
        return BiSeries([[fn(c) for c in row] for row in self.rows], self.order, fn(self.zero))

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return self.order == other.order and self.rows == other.rows

    def __hash__(self):
        return hash((self.order, self.rows))

    def __repr__(self):
        terms = [f"{c}*x^{i}*y^{j}" for (i, j), c in self.terms() if c != 0]
        body = " + ".join(terms) if terms else "0"
        return f"BiSeries({body} + O({self.order + 1}))"
