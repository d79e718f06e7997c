"""Piecewise polynomial vector fields: ingestion and tangency classification.

The switching line is fixed to ``{y = 0}``; ``Z+ = (X+, Y+)`` acts on
``y > 0`` and ``Z- = (X-, Y-)`` on ``y < 0``.  Coefficients are evaluated to
field elements (exact rationals, or big floats when some parameter is
irrational) when a template is bound.
"""

from __future__ import annotations

import ast
import json
import keyword
import math
import operator
import random
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .errors import (
    NotMonodromic, NotTangential, OddMultiplicity, ParseError, UnboundParameter,
)
from .exact import BigFloatField, BiSeries, RationalField, UniSeries

__all__ = [
    "Poly2", "PolyVF", "PiecewiseField", "FieldTemplate", "TangencyClassification",
    "INFINITE", "contact_multiplicity", "classify", "load_template", "parse_template",
    "load_field", "random_monodromic_field", "reflect", "reverse_time",
]

INFINITE = math.inf


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class Poly2:
    """Bivariate polynomial ``sum c_ij x^i y^j`` over a coefficient field."""

    __slots__ = ("terms", "field")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None, field=None):
        self.field = field or RationalField()
        out = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError("exponents must be nonnegative")
            c = self.field.convert(c) if not isinstance(c, type(self.field.zero)) else c
            c = out.get((i, j), self.field.zero) + c
            out[(i, j)] = c
        self.terms = {k: v for k, v in out.items() if v != 0}

    def coeff(self, i: int, j: int = 0):
        return self.terms.get((i, j), self.field.zero)

    @property
    def x_degree(self) -> int:
        return max((i for i, _ in self.terms), default=0)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def __call__(self, x, y):
        return sum((c * x ** i * y ** j for (i, j), c in self.terms.items()), 0 * x)

    def at_y0(self, order: int) -> UniSeries:
        return UniSeries([self.coeff(i, 0) for i in range(order + 1)], order, self.field.zero)

    def to_biseries(self, order: int) -> BiSeries:
        return BiSeries.from_terms(self.terms, order, self.field.zero)

    def float_terms(self) -> list[tuple[float, int, int]]:
        return [(float(c), i, j) for (i, j), c in sorted(self.terms.items())]

    def __add__(self, other: "Poly2") -> "Poly2":
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, self.field.zero) + c
        return Poly2(terms, self.field)

    def __mul__(self, other) -> "Poly2":
        if not isinstance(other, Poly2):
            return Poly2({k: c * other for k, c in self.terms.items()}, self.field)
        terms: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                terms[key] = terms.get(key, self.field.zero) + c1 * c2
        return Poly2(terms, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def reflect_y(self) -> "Poly2":
        """Substitute ``y -> -y``."""
        return Poly2({(i, j): (c if j % 2 == 0 else -c) for (i, j), c in self.terms.items()},
                     self.field)

    def with_field(self, field) -> "Poly2":
        return Poly2({k: field.convert(c) for k, c in self.terms.items()}, field)

    def __eq__(self, other):
        return isinstance(other, Poly2) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*x^{i}*y^{j}" for (i, j), c in sorted(self.terms.items()))


@dataclass(frozen=True)
class PolyVF:
    X: Poly2
    Y: Poly2

    def scaled(self, factor) -> "PolyVF":
        return PolyVF(self.X * factor, self.Y * factor)


@dataclass(frozen=True)
class PiecewiseField:
    upper: PolyVF
    lower: PolyVF
    parameters: Mapping[str, object] = dc_field(default_factory=dict)
    field: object = dc_field(default_factory=RationalField)

    def half(self, side: str) -> PolyVF:
        if side == "upper":
            return self.upper
        if side == "lower":
            return self.lower
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def make_field(upper, lower, parameters=None, field=None) -> PiecewiseField:
    """Build a field from ``((Xterms, Yterms), (Xterms, Yterms))`` dictionaries."""
    field = field or RationalField()
    (xu, yu), (xl, yl) = upper, lower
    return PiecewiseField(PolyVF(Poly2(xu, field), Poly2(yu, field)),
                          PolyVF(Poly2(xl, field), Poly2(yl, field)),
                          dict(parameters or {}), field)


def reflect(pf: PiecewiseField) -> PiecewiseField:
    """Apply ``(x, y) -> (x, -y)``: the lower field becomes the upper one."""
    def flip(vf: PolyVF) -> PolyVF:
        return PolyVF(vf.X.reflect_y(), -vf.Y.reflect_y())
    return PiecewiseField(flip(pf.lower), flip(pf.upper), pf.parameters, pf.field)


def reverse_time(pf: PiecewiseField) -> PiecewiseField:
    return PiecewiseField(pf.upper.scaled(-1), pf.lower.scaled(-1), pf.parameters, pf.field)


# ---------------------------------------------------------------------------
# coefficient expressions
# ---------------------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


class _ExprError(Exception):
    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset


_KEYWORD = re.compile(r"\b(" + "|".join(k for k in keyword.kwlist if k.islower()) + r")\b")
_MANGLE = "_kw_"


def _parse_expression(text: str) -> ast.Expression:
    # parameter names such as "lambda" collide with Python keywords
    source = _KEYWORD.sub(lambda m: _MANGLE + m.group(1), text.strip())
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise _ExprError(f"invalid expression {text!r}: {exc.msg}", (exc.offset or 1) - 1)
    _validate(tree.body, source)
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id.startswith(_MANGLE):
            node.id = node.id[len(_MANGLE):]
        elif isinstance(node, ast.Constant) and isinstance(node.value, float):
            # decimal literals are read from the source text to stay exact
            node.exact = Fraction(ast.get_source_segment(source, node) or repr(node.value))
    return tree


def _validate(node, text):
    if isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS and not isinstance(node.op, ast.Pow):
            raise _ExprError(f"operator {type(node.op).__name__} not allowed", node.col_offset)
        _validate(node.left, text)
        _validate(node.right, text)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            raise _ExprError("only unary + and - are allowed", node.col_offset)
        _validate(node.operand, text)
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise _ExprError(f"unsupported literal {node.value!r}", node.col_offset)
    elif isinstance(node, ast.Name):
        pass
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id == "sqrt"
                and len(node.args) == 1 and not node.keywords):
            raise _ExprError("only sqrt(<expr>) calls are allowed", node.col_offset)
        _validate(node.args[0], text)
    else:
        raise _ExprError(f"unsupported syntax {type(node).__name__}", getattr(node, "col_offset", 0))


def _names(node) -> set[str]:
    calls = {id(sub.func) for sub in ast.walk(node) if isinstance(sub, ast.Call)}
    return {sub.id for sub in ast.walk(node) if isinstance(sub, ast.Name) and id(sub) not in calls}


def _uses_sqrt(node) -> bool:
    return any(isinstance(sub, ast.Call) for sub in ast.walk(node))


def _eval(node, text, env, field):
    if isinstance(node, ast.Expression):
        return _eval(node.body, text, env, field)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, int):
            return field.convert(node.value)
        return field.convert(node.exact)
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise _ExprError(f"unbound parameter {node.id!r}", node.col_offset)
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        value = _eval(node.operand, text, env, field)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.Call):
        if not hasattr(field, "sqrt"):
            raise _ExprError("sqrt needs a big-float field", node.col_offset)
        return field.sqrt(_eval(node.args[0], text, env, field))
    if isinstance(node, ast.BinOp):
        left = _eval(node.left, text, env, field)
        right = _eval(node.right, text, env, field)
        if isinstance(node.op, ast.Pow):
            if isinstance(right, Fraction) and right.denominator == 1:
                return left ** int(right)
            if not isinstance(right, Fraction) and right == int(right):
                return left ** int(right)
            raise _ExprError("exponents must be integers", node.right.col_offset)
        try:
            return _BINOPS[type(node.op)](left, right)
        except ZeroDivisionError:
            raise _ExprError("division by zero", node.col_offset)
    raise _ExprError(f"unsupported syntax {type(node).__name__}", 0)


def _locate(source: str | None, needle: str) -> tuple[int | None, int | None]:
    if not source:
        return None, None
    pos = source.find(json.dumps(needle))
    if pos < 0:
        pos = source.find(needle)
    if pos < 0:
        return None, None
    line = source.count("\n", 0, pos) + 1
    column = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, column


# ---------------------------------------------------------------------------
# templates (possibly unbound parameters)
# ---------------------------------------------------------------------------

@dataclass
class _Coefficient:
    text: str
    tree: object
    where: str


@dataclass
class FieldTemplate:
    """Parsed input file: monomials with expression coefficients.

    ``bind`` evaluates every coefficient for concrete parameter values and
    returns a :class:`PiecewiseField`.
    """

    entries: dict                      # (half, comp) -> list of (num, den, i, j)
    parameters: dict                   # name -> raw value spec
    source: str | None = None

    def referenced(self) -> set[str]:
        names = set()
        for terms in self.entries.values():
            for num, den, _, _ in terms:
                names |= _names(num.tree) | _names(den.tree)
        return names

    def unbound(self) -> set[str]:
        return self.referenced() - set(self.parameters)

    def needs_bigfloat(self, values: Mapping | None = None) -> bool:
        for spec in self.parameters.values():
            if "real" in spec or ("expr" in spec and _uses_sqrt(spec["expr"].tree)):
                return True
        for terms in self.entries.values():
            for num, den, _, _ in terms:
                if _uses_sqrt(num.tree) or _uses_sqrt(den.tree):
                    return True
        for value in (values or {}).values():
            if not isinstance(value, (int, Fraction, str)):
                return True
            if isinstance(value, str) and "/" not in value and not _is_integer_text(value):
                return True
        return False

    def bind(self, values: Mapping | None = None, field=None, digits: int = 50) -> PiecewiseField:
        values = dict(values or {})
        if field is None:
            field = BigFloatField(digits) if self.needs_bigfloat(values) else RationalField()
        env = {}
        for name, spec in self.parameters.items():
            if name in values:
                continue
            env[name] = self._parameter_value(name, spec, field)
        for name, value in values.items():
            env[name] = field.convert(value)
        missing = self.referenced() - set(env)
        if missing:
            raise UnboundParameter(f"unbound parameter(s): {', '.join(sorted(missing))}")
        halves = {}
        for (half, comp), terms in self.entries.items():
            poly: dict = {}
            for num, den, i, j in terms:
                c = self._evaluate(num, env, field) / self._nonzero(den, env, field)
                poly[(i, j)] = poly.get((i, j), field.zero) + c
            halves[(half, comp)] = Poly2(poly, field)
        return PiecewiseField(
            PolyVF(halves[("upper", "X")], halves[("upper", "Y")]),
            PolyVF(halves[("lower", "X")], halves[("lower", "Y")]),
            dict(env), field)

    def _evaluate(self, coef: _Coefficient, env, field):
        try:
            return _eval(coef.tree, coef.text, env, field)
        except _ExprError as exc:
            line, column = _locate(self.source, coef.text)
            raise ParseError(f"{coef.where}: {exc} (offset {exc.offset} in expression)",
                             line, column) from None

    def _nonzero(self, coef, env, field):
        value = self._evaluate(coef, env, field)
        if value == 0:
            line, column = _locate(self.source, coef.text)
            raise ParseError(f"{coef.where}: zero denominator", line, column)
        return value

    def _parameter_value(self, name, spec, field):
        where = f"parameters.{name}"
        if "rational" in spec:
            num, den = spec["rational"]
            return field.convert(Fraction(int(num), int(den)))
        if "real" in spec:
            return field.convert(str(spec["real"]))
        return self._evaluate(spec["expr"], {}, field)


def _is_integer_text(text: str) -> bool:
    try:
        int(text)
        return True
    except ValueError:
        return False


def _coefficient(raw, where, source) -> _Coefficient:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        line, column = _locate(source, str(raw))
        raise ParseError(f"{where}: coefficient must be an integer or an expression string, got {raw!r}",
                         line, column)
    text = str(raw)
    try:
        tree = _parse_expression(text)
    except _ExprError as exc:
        line, column = _locate(source, text)
        raise ParseError(f"{where}: {exc} (offset {exc.offset} in expression)", line, column) from None
    return _Coefficient(text, tree, where)


def parse_template(text: str) -> FieldTemplate:
    """Parse the JSON input format (see README for the schema)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", 1, 1)
    entries = {}
    for half in ("upper", "lower"):
        block = data.get(half)
        if not isinstance(block, dict):
            raise ParseError(f"missing object {half!r}", *_locate(text, half))
        for comp in ("X", "Y"):
            terms = block.get(comp, [])
            if not isinstance(terms, list):
                raise ParseError(f"{half}.{comp} must be a list of [num, den, i, j]",
                                 *_locate(text, comp))
            parsed = []
            for n, entry in enumerate(terms):
                where = f"{half}.{comp}[{n}]"
                if not (isinstance(entry, list) and len(entry) == 4):
                    raise ParseError(f"{where}: expected [num, den, i, j], got {entry!r}",
                                     *_locate(text, json.dumps(entry)[:20]))
                num, den, i, j = entry
                if not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in (i, j)):
                    raise ParseError(f"{where}: exponents must be nonnegative integers", *_locate(text, where))
                parsed.append((_coefficient(num, where + ".num", text),
                               _coefficient(den, where + ".den", text), i, j))
            entries[(half, comp)] = parsed
    parameters = {}
    for name, spec in (data.get("parameters") or {}).items():
        where = f"parameters.{name}"
        if not name.isidentifier():
            raise ParseError(f"{where}: parameter names must be identifiers", *_locate(text, name))
        if not isinstance(spec, dict) or len(spec) != 1:
            raise ParseError(f"{where}: expected {{'rational': [n, d]}}, {{'real': '...'}} or {{'expr': '...'}}",
                             *_locate(text, name))
        kind, value = next(iter(spec.items()))
        if kind == "rational":
            if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)
                    and value[1] != 0):
                raise ParseError(f"{where}: rational must be [num, den] with den != 0", *_locate(text, name))
            parameters[name] = {"rational": value}
        elif kind == "real":
            try:
                Fraction(str(value))
            except ValueError:
                raise ParseError(f"{where}: not a decimal number: {value!r}", *_locate(text, str(value))) from None
            parameters[name] = {"real": str(value)}
        elif kind == "expr":
            coef = _coefficient(value, where, text)
            if _names(coef.tree):
                raise ParseError(f"{where}: parameter expressions cannot reference other names",
                                 *_locate(text, value))
            parameters[name] = {"expr": coef}
        else:
            raise ParseError(f"{where}: unknown value kind {kind!r}", *_locate(text, kind))
    return FieldTemplate(entries, parameters, text)


def load_template(path) -> FieldTemplate:
    return parse_template(Path(path).read_text(encoding="utf-8"))


def load_field(path, values: Mapping | None = None, digits: int = 50) -> PiecewiseField:
    return load_template(path).bind(values, digits=digits)


def template_from_field(pf: PiecewiseField) -> dict:
    """JSON-ready dictionary for a bound rational field."""
    def comp(poly: Poly2):
        out = []
        for (i, j), c in sorted(poly.terms.items()):
            c = Fraction(c)
            out.append([c.numerator, c.denominator, i, j])
        return out
    return {
        "upper": {"X": comp(pf.upper.X), "Y": comp(pf.upper.Y)},
        "lower": {"X": comp(pf.lower.X), "Y": comp(pf.lower.Y)},
        "parameters": {},
    }


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangencyClassification:
    """Outcome of the C1-C3 checks at the origin.

    ``invisible_plus``/``invisible_minus`` are the literal sign conditions on
    the Lie derivatives ``(Z+)^{2k}h(0,0) < 0`` and ``(Z-)^{2k}h(0,0) > 0``.
    ``convention`` records which consistent sign pattern the input realizes:
    ``"invisible"`` when both literal conditions hold, ``"reflected"`` when
    both fail (then ``delta*a > 0`` on both sides and the fold is invisible
    for the reflected switching function ``h = -y``).  Mixed patterns have no
    return map and are not monodromic.
    """

    k_plus: int
    k_minus: int
    delta: int
    invisible_plus: bool
    invisible_minus: bool
    orientation_ok: bool
    monodromic: bool
    convention: str | None
    lie_plus: object
    lie_minus: object
    reasons: tuple = ()

    def summary(self) -> str:
        pair = f"({2 * self.k_plus},{2 * self.k_minus})"
        sign = "+1" if self.delta > 0 else "−1"
        if self.monodromic:
            text = f"monodromic {pair}, δ={sign}"
            if self.convention == "reflected":
                text += " [sign pattern delta*a>0: visible for h=y, invisible for h=-y]"
            return text
        return "not monodromic: " + "; ".join(self.reasons)


def contact_multiplicity(vf: PolyVF, probe_degree: int | None = None):
    """Multiplicity of contact between ``vf`` and ``{y = 0}`` at the origin.

    Returns the smallest ``n >= 2`` whose ``x^(n-1)`` coefficient of
    ``Y(x, 0)`` is nonzero, or :data:`INFINITE` when ``Y(x, 0)`` vanishes up to
    ``probe_degree`` (default: ``deg_x Y + 1``, which decides it exactly).
    """
    field = vf.X.field
    if field.is_zero(vf.X.coeff(0, 0)):
        raise NotTangential("X(0,0) = 0: the origin is a singular point of the half field")
    if not field.is_zero(vf.Y.coeff(0, 0)):
        raise NotTangential("Y(0,0) != 0: the field crosses the switching line transversally")
    probe = probe_degree if probe_degree is not None else vf.Y.x_degree + 1
    for m in range(1, probe + 1):
        if not field.is_zero(vf.Y.coeff(m, 0)):
            return m + 1
    return INFINITE


def _half_multiplicity(vf: PolyVF, side: str) -> int:
    n = contact_multiplicity(vf)
    if n == INFINITE:
        raise NotMonodromic(f"{side} field is tangent to the switching line along Y(x,0) = 0")
    if n % 2:
        raise OddMultiplicity(f"{side} field has contact of odd multiplicity {n}")
    return n // 2


def classify(pf: PiecewiseField) -> TangencyClassification:
    field = pf.field
    k_plus = _half_multiplicity(pf.upper, "upper")
    k_minus = _half_multiplicity(pf.lower, "lower")
    xp = pf.upper.X.coeff(0, 0)
    xm = pf.lower.X.coeff(0, 0)
    sp, sm = field.sign(xp), field.sign(xm)
    orientation_ok = sp * sm < 0
    delta = sp

    def lie(vf, k):
        n = 2 * k
        return vf.X.coeff(0, 0) ** (n - 1) * vf.Y.coeff(n - 1, 0) * math.factorial(n - 1)

    lie_plus = lie(pf.upper, k_plus)
    lie_minus = lie(pf.lower, k_minus)
    invisible_plus = lie_plus < 0
    invisible_minus = lie_minus > 0
    if invisible_plus and invisible_minus:
        convention = "invisible"
    elif not invisible_plus and not invisible_minus:
        convention = "reflected"
    else:
        convention = None

    reasons = []
    if not orientation_ok:
        reasons.append("C3 fails: X+(0,0)*X-(0,0) > 0")
    if convention is None:
        bad = "upper" if not invisible_plus else "lower"
        reasons.append(f"C2 fails: {bad} fold is visible while the other is invisible")
    return TangencyClassification(
        k_plus=k_plus, k_minus=k_minus, delta=delta,
        invisible_plus=invisible_plus, invisible_minus=invisible_minus,
        orientation_ok=orientation_ok,
        monodromic=orientation_ok and convention is not None,
        convention=convention, lie_plus=lie_plus, lie_minus=lie_minus,
        reasons=tuple(reasons))


# ---------------------------------------------------------------------------
# random fixtures
# ---------------------------------------------------------------------------

def _rand_coeff(rng: random.Random, scale=Fraction(1)):
    num = rng.randint(-4, 4)
    den = rng.choice((1, 2, 3, 4, 5, 6))
    return Fraction(num, den) * scale / 4


def _random_half(rng, k, x_sign, y_sign, degree):
    x00 = rng.choice((Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3, 2)))
    X = {(0, 0): x_sign * x00}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if (i or j) and rng.random() < 0.5:
                X[(i, j)] = _rand_coeff(rng, Fraction(1, 2))
    lead = rng.choice((Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3, 4)))
    Y = {(2 * k - 1, 0): y_sign * lead}
    for i in range(2 * k, 2 * k + 4):
        if rng.random() < 0.7:
            Y[(i, 0)] = _rand_coeff(rng)
    for i in range(degree + 1):
        for j in range(1, degree + 1 - i):
            if rng.random() < 0.5:
                Y[(i, j)] = _rand_coeff(rng)
    return {k_: v for k_, v in X.items() if v}, {k_: v for k_, v in Y.items() if v}


def random_monodromic_field(rng: random.Random, k_plus: int = 1, k_minus: int = 1, delta: int = 1,
                            convention: str = "invisible", degree: int = 3) -> PiecewiseField:
    """Random rational field with a ``(2k+, 2k-)`` monodromic tangency at 0.

    ``convention="invisible"`` gives ``delta*a < 0`` on both sides,
    ``"reflected"`` gives ``delta*a > 0`` (the sign pattern of the classical
    worked examples).  Coefficients are small so that trajectories started
    at ``|x0| <= 1/8`` come back to the switching line.
    """
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    y_sign = -delta if convention == "invisible" else delta
    upper = _random_half(rng, k_plus, delta, y_sign, degree)
    lower = _random_half(rng, k_minus, -delta, y_sign, degree)
    return make_field(upper, lower)
