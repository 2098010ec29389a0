"""innoflow: weighted directed innovation-flow networks.

Simulates the preferential weight assignment process over a fixed edge
universe, evaluates its closed-form weight distributions, computes node-pair
similarity metrics and rolling link-prediction diagnostics, builds
input-output proximity matrices, and estimates the process parameters with a
small econometric kernel.
"""

__version__ = "0.1.0"

from . import econ, metrics, netcore, predict, pwa, stats  # noqa: F401
from .errors import (  # noqa: F401
    ConvergenceError,
    DataValidationError,
    NumericError,
    PerfectSeparationError,
    SpectralRadiusError,
)
