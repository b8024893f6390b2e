# gems_select/services/design/exceptions.py
from typing import TYPE_CHECKING, Optional

from gems_select.core.exceptions import GemsError

if TYPE_CHECKING:
    from gems_select.core.models import DesignSolution


class DesignError(GemsError):
    """Base exception for experimental-design errors"""

    pass


class SolverConvergenceError(DesignError):
    """Raised when the min-max solver hits its iteration cap without certifying the tolerance.

    The best design found so far is kept on ``best``.
    """

    def __init__(self, message: str, best: Optional["DesignSolution"] = None):
        super().__init__(message)
        self.best = best


class RoundingError(DesignError):
    """Base exception for rounding errors"""

    pass


class RoundingPreconditionError(RoundingError, ValueError):
    """Raised when the number of pulls is below the rounding floor"""

    pass


class RoundingGuaranteeError(RoundingError):
    """Raised when a rounded allocation misses the (1+zeta) guarantee"""

    def __init__(self, message: str, achieved: float, bound: float):
        super().__init__(message)
        self.achieved = achieved
        self.bound = bound
