"""Shared exception types and the CLI exit-code taxonomy."""


class UavjamError(Exception):
    """Base class for package errors."""


class ConfigError(UavjamError):
    """Invalid configuration value or malformed config file."""


class InfeasiblePlacement(UavjamError):
    """Scenario placement constraints could not be met within the retry budget."""


class DomainError(UavjamError):
    """Numeric argument outside the function's domain."""


class ShapeError(UavjamError):
    """Array shape incompatible with the operation."""


class DataError(UavjamError):
    """Empty or inconsistent data fed to training/evaluation."""


class DegenerateInput(UavjamError):
    """Input with no usable signal (e.g. constant series)."""


# exit codes, fixed for CI scripting
EXIT_CONFIG = 2
EXIT_PLACEMENT = 3
EXIT_DATA = 4
EXIT_COMPAT = 5
