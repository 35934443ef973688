"""Exception types shared across the simulator."""


class CjtsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(CjtsimError):
    """Malformed or inconsistent scenario configuration."""


class InfeasibleTargetsError(CjtsimError):
    """SINR targets admit no feasible precoder under the duality construction.

    Raised when the multiplier fixed point diverges or the coupling-system
    solution produces a non-positive scaling factor.
    """

    def __init__(self, msg, detail=None):
        super().__init__(msg)
        self.detail = detail


class DEInfeasibleError(CjtsimError):
    """Deterministic-equivalent system is invalid for the given targets.

    Covers spectral radius >= 1 in the derivative system, non-positive
    covariance-based scaling factors, and materially negative budgets.
    """

    def __init__(self, msg, detail=None):
        super().__init__(msg)
        self.detail = detail


class NumericalError(CjtsimError):
    """Numerical failure distinct from genuine infeasibility."""
