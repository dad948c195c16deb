"""Exception types shared across the simulator."""


class UdnSimError(Exception):
    """Base class for simulator errors."""


class ConfigurationError(UdnSimError, ValueError):
    """A parameter, config key, or scenario definition is invalid.

    The CLI maps this to exit code 2.
    """
