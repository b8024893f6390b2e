# gems_select/core/exceptions.py
class GemsError(Exception):
    """Base exception for gems-select"""

    pass


class InstanceError(GemsError, ValueError):
    """Invalid instance construction or out-of-range arguments"""

    pass


class ConfigError(GemsError):
    """Invalid experiment configuration"""

    pass
