# gems_select/orchestration/exceptions.py
from gems_select.core.exceptions import GemsError


class HarnessError(GemsError):
    """Base exception for simulation harness errors"""

    pass


class MissingIntrinsicDimError(HarnessError):
    """Raised when reference bounds need d* but the instance does not carry it"""

    pass
