"""Exception hierarchy shared across the package."""


class WeakGaussError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(WeakGaussError, ValueError):
    pass


class InsufficientEnsembleError(WeakGaussError, ValueError):
    pass


class InsufficientDataError(WeakGaussError, ValueError):
    pass


class ConfigError(WeakGaussError, ValueError):
    """Raised for malformed or invalid experiment configuration.

    ``field`` names the offending key when known; ``line`` is set for
    syntax errors in a config document.
    """

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
