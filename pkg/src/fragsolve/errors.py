"""Exception hierarchy shared by every fragsolve module."""


class FragsolveError(Exception):
    """Base class for all library errors."""


class DomainError(FragsolveError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class UnsupportedConfigurationError(FragsolveError, ValueError):
    """The coefficient set does not fall into a solvable class."""


class ValidityIntervalError(FragsolveError, ValueError):
    """A time or characteristic variable left its admissible interval."""


class SpectralConditionError(FragsolveError, ValueError):
    """The resolvent parameter lies too close to the spectrum."""


class MomentDivergenceError(FragsolveError, ValueError):
    """The requested moment is infinite for the given parameters."""


class QuadratureError(FragsolveError, ArithmeticError):
    """A quadrature did not resolve its integrand."""


class SeriesTruncationError(FragsolveError, ArithmeticError):
    """A truncated power series failed its tail check."""


class ConfigError(FragsolveError, ValueError):
    """A scenario configuration is malformed.

    ``field`` names the offending key (dotted path) when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
