"""Exception types shared across the package.

The CLI maps each class to a stable exit code (see ``hafvf.cli``).
"""


class HafvfError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HafvfError, ValueError):
    """A numeric argument lies outside the domain of a function."""


class ConfigError(HafvfError, ValueError):
    """An invalid configuration value or parameter set."""


class InputError(HafvfError, ValueError):
    """A malformed observation or stream row."""


class NumericalError(HafvfError, ArithmeticError):
    """A computation produced a non-finite or ill-conditioned result."""
