# gems_select/services/misspec/exceptions.py
from gems_select.core.exceptions import GemsError


class MisspecError(GemsError):
    """Base exception for misspecification computations"""

    pass


class EpsilonUnreachableError(MisspecError):
    """Raised when gamma(D) exceeds the requested epsilon"""

    pass


class FitError(MisspecError):
    """Raised when the Chebyshev linear program fails"""

    pass
