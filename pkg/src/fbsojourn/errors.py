"""Exception types shared across the package."""


class FBError(Exception):
    """Base class for package errors."""


class DomainError(FBError, ValueError):
    """Argument outside the domain of an operation."""


class UnsupportedRegimeError(FBError):
    """The requested asymptotic regime or table row does not apply."""


class InfiniteMomentError(FBError):
    """A required moment (typically E[B^2]) is infinite."""


class BracketError(FBError, ValueError):
    """Root-finding target not enclosed by the bracket."""


class QuadratureError(FBError):
    """Adaptive quadrature failed; carries the best estimate obtained."""

    def __init__(self, message, value=float("nan"), err_estimate=float("inf"), abscissa=None):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate
        self.abscissa = abscissa


class SimulationError(FBError):
    """Simulation guard tripped (event wall, unstable load)."""
