"""Exception hierarchy shared by every module.

The command line maps these onto exit codes: configuration problems exit
with 2, failed invariants with 1 and iterations that do not converge with 3.
"""


class WWLumpError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WWLumpError, ValueError):
    """Invalid parameters, grids or configuration values.

    ``field`` names the offending configuration key when one is known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class PreconditionError(WWLumpError, ValueError):
    """An input violates the documented precondition of an operation."""


class NumericError(WWLumpError, ArithmeticError):
    """Non-finite values where finite ones are required."""


class InvariantFailure(WWLumpError):
    """A verified mathematical property does not hold.

    ``report`` carries whatever diagnostic data the check produced.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report if report is not None else {}


class IterationError(WWLumpError):
    """An iterative method stopped without meeting its tolerance.

    ``history`` holds the residual or update norms seen so far; ``report``
    optionally carries a fuller run report.
    """

    def __init__(self, message, history=None, report=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.report = report


class SolverFailure(IterationError):
    """The Krylov solver for the linearized operator stagnated."""


class OracleFailure(IterationError):
    """The transformed-domain Laplace solve did not converge."""
