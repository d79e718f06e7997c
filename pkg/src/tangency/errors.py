"""Exception hierarchy.

Every error raised by the library derives from :class:`TangencyError`.  The
``exit_code`` attribute is what the command line front end returns when the
error escapes a subcommand: 1 for domain errors, 2 for usage/parse errors and
3 for violated internal invariants.
"""


class TangencyError(Exception):
    exit_code = 1


# -- exact core ---------------------------------------------------------------

class DivisionNotExact(TangencyError):
    """Low-order numerator coefficients do not cancel against the divisor."""


class NonzeroConstantTerm(TangencyError):
    """Series composition needs an inner series vanishing at the origin."""


class OrderBudgetExceeded(TangencyError):
    """A coefficient beyond the validated truncation order was requested."""


class BadArity(TangencyError):
    """Wrong number of Bell polynomial arguments."""


# -- model --------------------------------------------------------------------

class ParseError(TangencyError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class NotTangential(TangencyError):
    """The origin is not a tangency point of the half field."""


class OddMultiplicity(TangencyError):
    """Contact of odd multiplicity: no fold, so no return map."""


class NotMonodromic(TangencyError):
    """The two contacts do not combine into a monodromic singularity."""


class UnboundParameter(TangencyError):
    exit_code = 2


# -- lyapunov -----------------------------------------------------------------

class DegenerateMu(TangencyError):
    exit_code = 3


# -- numeric ------------------------------------------------------------------

class NoReturn(TangencyError):
    """The trajectory did not come back to the switching line."""


class DegenerateCrossing(TangencyError):
    """The trajectory touches the switching line tangentially."""


class VanishingF(TangencyError):
    """Angular velocity of the polar system is too close to zero."""


class QuadratureFailure(TangencyError):
    pass


# -- bifurcation --------------------------------------------------------------

class NoSignChange(TangencyError):
    pass


class NotMonodromicAtPoint(NotMonodromic):
    pass


class InvariantViolation(TangencyError):
    exit_code = 3
