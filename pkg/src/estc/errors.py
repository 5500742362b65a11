"""Shared exception types for the channel construction engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class DataError(EngineError):
    """Malformed or inconsistent input data (bad records, dangling ids)."""


class TransportError(EngineError):
    """Remote endpoint unreachable, timed out, or returned a bad response."""


class ValidationError(EngineError):
    """A value violates a declared contract (empty phrase, over-length output)."""


class ConflictError(EngineError):
    """A state transition was attempted on an entity not in the required state."""
