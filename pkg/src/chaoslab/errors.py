"""Exception types shared across the package."""

__all__ = [
    "ChaosLabError",
    "ParameterError",
    "DomainError",
    "NoScheduleError",
    "EnumerationCapError",
    "ConfigError",
]


class ChaosLabError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ChaosLabError, ValueError):
    """An argument is outside its documented domain."""


class DomainError(ChaosLabError, ValueError):
    """The requested quantity is undefined for this input (e.g. a ratio
    whose numerator and denominator are both identically degenerate)."""


class NoScheduleError(ChaosLabError):
    """No counterexample schedule exists for the given law and range."""


class EnumerationCapError(ChaosLabError, ValueError):
    """An exact-enumeration request exceeds the documented size cap."""


class ConfigError(ChaosLabError, ValueError):
    """A run configuration is malformed or names an unknown experiment."""
