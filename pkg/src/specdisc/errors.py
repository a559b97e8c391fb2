"""Exception hierarchy shared by every module."""


class SpecDiscError(Exception):
    """Base class for all library errors."""


class InputError(SpecDiscError, ValueError):
    """Malformed or out-of-domain input (bad shapes, non-finite entries, bad params)."""


class PreconditionError(SpecDiscError, ValueError):
    """Input is well-formed but violates an operation's mathematical precondition."""


class ValidationError(PreconditionError):
    """A structured object (e.g. an idempotent family) fails its invariants."""


class NumericalError(SpecDiscError, ArithmeticError):
    """A numerical kernel failed (non-convergence, breakdown)."""


class SingularMatrixError(NumericalError):
    """Linear solve hit a pivot below the scaled singularity threshold."""


class AnalysisError(SpecDiscError):
    """A computed result violates a bound the analysis asserts."""
