"""Exception and warning classes raised across the package."""


class KoopmanError(Exception):
    """Base class for all package errors."""


class DimensionError(KoopmanError, ValueError):
    """Array shapes do not agree with the declared dimensions."""


class DomainError(KoopmanError, ValueError):
    """Input lies outside the domain of a function (e.g. non-finite)."""


class EmptyDataError(KoopmanError, ValueError):
    """Not enough samples to form the requested quantity."""


class NumericalError(KoopmanError, ArithmeticError):
    """A numerical routine failed or produced non-finite output."""


class ConfigError(KoopmanError, ValueError):
    """Invalid solver or run configuration."""


class UnsupportedDictionaryError(KoopmanError, TypeError):
    """The dictionary kind is not supported by the requested estimator."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at its iteration cap."""
