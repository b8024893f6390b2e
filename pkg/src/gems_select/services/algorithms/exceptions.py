# gems_select/services/algorithms/exceptions.py
from gems_select.core.exceptions import GemsError


class AlgorithmError(GemsError):
    """Base exception for bandit algorithm errors"""

    pass


class BudgetTooSmallError(AlgorithmError, ValueError):
    """Raised when a fixed budget leaves no room for a single subroutine"""

    pass


class EnvironmentExhaustedError(AlgorithmError):
    """Raised when a sampling context runs past its pull cap"""

    pass
