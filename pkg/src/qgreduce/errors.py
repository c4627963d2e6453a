"""Exception hierarchy.

The CLI maps these onto exit codes: validation problems exit with 2,
failed numerical checks with 3 and unmet reduction hypotheses with 4.
"""


class QGraphError(Exception):
    """Base class for all errors raised by this package."""


class GraphValidationError(QGraphError, ValueError):
    """Malformed graph document or invalid graph data."""


class CouplingError(GraphValidationError):
    """Vertex coupling data violates its defining constraints."""


class IntegrationError(QGraphError, ArithmeticError):
    """The ODE integrator could not meet its tolerance."""

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class SpectrumScanError(QGraphError):
    """A spectral scan ran out of window before finding what was asked."""


class PreconditionError(QGraphError):
    """A hypothesis needed for the dimension reduction does not hold."""


class SymmetryError(PreconditionError):
    pass


class ScalarConditionError(PreconditionError):
    """Vertex unitaries have more than one eigenvalue different from -1."""

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues)


class NumericalCheckError(QGraphError):
    """An internal numerical consistency check failed."""
