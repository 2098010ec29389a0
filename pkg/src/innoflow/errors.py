"""Exception types shared across the package.

The CLI maps these onto exit codes: data validation problems exit with 3,
numeric failures (spectral radius, separation, non-convergence) with 4.
"""


class DataValidationError(ValueError):
    """Input data violates a structural invariant."""


class NumericError(RuntimeError):
    """A numeric procedure cannot produce a valid result."""


class SpectralRadiusError(NumericError):
    """A required spectral-radius condition fails."""

    def __init__(self, message: str, radius: float):
        super().__init__(message)
        self.radius = radius


class PerfectSeparationError(NumericError):
    """Logit likelihood is unbounded because classes are separable."""


class ConvergenceError(NumericError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
