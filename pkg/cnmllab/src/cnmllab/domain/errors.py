from typing import Hashable, Optional


class CnmlError(Exception):
    """Root of every error raised by cnmllab."""


class DomainError(CnmlError, ValueError):
    """Statistic out of range, parameter outside the interior, malformed grid or prior."""


class ContractError(CnmlError, ValueError):
    """Inputs that are individually valid but do not fit together."""


class ConfigError(CnmlError, ValueError):
    pass


class CapacityError(CnmlError):
    """An enumeration would exceed the configured cap."""

    def __init__(self, what: str, count: int, cap: int):
        super().__init__(f"{what}: {count} items exceeds cap {cap}")
        self.count = count
        self.cap = cap


class DegenerateRowError(CnmlError):
    """A conditional table row has a zero normalizer."""

    def __init__(self, j: Hashable, message: Optional[str] = None):
        super().__init__(message or f"row j={j} has zero normalizer")
        self.j = j


class DegeneratePriorError(CnmlError):
    """The prior gives zero marginal mass to an observed statistic."""

    def __init__(self, j: Hashable):
        super().__init__(f"prior marginal p_pi(j) is zero at row j={j}")
        self.j = j


class NumericalError(CnmlError):
    pass


class QuadratureError(NumericalError):
    """Doubling the quadrature order moved the result by more than the tolerance."""

    def __init__(self, change: float, tolerance: float):
        super().__init__(f"quadrature did not converge: order doubling changed the result by {change:.3e} > {tolerance:.1e}")
        self.change = change
        self.tolerance = tolerance


class InfeasibleProjectionError(CnmlError):
    """The projection divergence is infinite for every prior on the grid."""
