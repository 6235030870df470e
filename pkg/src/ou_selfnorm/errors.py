"""Exception hierarchy shared by every module."""


class SelfNormError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SelfNormError, ValueError):
    """Invalid distribution parameters or experiment configuration."""


class DomainError(SelfNormError, ValueError):
    """Argument outside the domain of an operation (window, grid, index)."""


class EmptyWalkError(DomainError):
    """A walk quantity was requested before any step was taken."""


class CapacityError(SelfNormError, RuntimeError):
    """A walk or sequence exceeds the configured size, or is too short."""
