"""Shared exception types."""


class InvalidParameterError(ValueError):
    """A parameter is outside the documented domain of an operation."""


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed the configured budget."""


class InternalConsistencyError(RuntimeError):
    """An internal cross-check failed; indicates a bug, not bad input."""
