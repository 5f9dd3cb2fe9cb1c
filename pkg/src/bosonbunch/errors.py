"""Shared exception types."""


class UnsupportedRegimeError(ValueError):
    """Raised when a computation is requested for more bosons than ports.

    Sampling and the cost-bound calculators are defined for densities
    rho = N/M at most one; callers must reject N > M rather than extrapolate.
    """
