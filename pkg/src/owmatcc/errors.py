"""Error types shared across the package.

ConfigError maps to CLI exit code 2, NumericalError (and subclasses) to 3.
"""


class OwmatccError(Exception):
    pass


class ConfigError(OwmatccError):
    """Invalid configuration, file format, or argument combination."""


class NumericalError(OwmatccError):
    """Numerical failure: singular matrices, divergence, non-finite states."""


class SingularCovarianceError(NumericalError):
    """A covariance matrix required to be positive definite is not.

    Carries lambda_min so callers can report how far from PD the matrix is.
    """

    def __init__(self, message, lambda_min=None):
        super().__init__(message)
        self.lambda_min = lambda_min


class DivergenceError(NumericalError):
    """Simulation or iteration produced non-finite values."""
