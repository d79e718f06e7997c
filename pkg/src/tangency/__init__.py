"""Lyapunov coefficients of monodromic tangential singularities of planar
piecewise polynomial (Filippov) vector fields.

The pipeline is ``model`` (input, classification) -> ``canonical`` (the
reduced form ``(+-delta, a x^(2k-1) + x^(2k) f(x) + y g(x, y))``) ->
``lyapunov`` (Bell-polynomial recursion for the half-return maps).
``numeric`` and ``polar`` give independent numerical half-return maps and
``bifurcation`` checks Hopf-type hypotheses over parameter families.
"""

__version__ = "0.1.0"

from .errors import TangencyError
from .exact import BigFloatField, BiSeries, RationalField, UniSeries
from .lyapunov import LyapunovResult, compute_V, lyapunov
from .model import PiecewiseField, classify, load_field, load_template, make_field
from .canonical import CanonicalForm, canonical_form

__all__ = [
    "__version__", "TangencyError", "BigFloatField", "BiSeries", "RationalField", "UniSeries",
    "LyapunovResult", "compute_V", "lyapunov", "PiecewiseField", "classify", "load_field",
    "load_template", "make_field", "CanonicalForm", "canonical_form",
]
