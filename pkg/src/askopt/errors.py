"""Exception types shared across the toolkit."""


class AskoptError(Exception):
    """Base class for every error raised by askopt."""


class DimensionMismatchError(AskoptError):
    """An array has the wrong dimensionality or axis length."""

    def __init__(self, expected, got, what="input"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected dimension {expected}, got {got}")


class ValidationError(AskoptError):
    """A value violates a structural invariant.

    ``field`` optionally names the offending field for machine-actionable
    error bodies (used by the HTTP service).
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message)


class SerializationError(AskoptError):
    """A payload could not be parsed; ``offset`` is the byte position if known."""

    def __init__(self, message, offset=None):
        self.offset = offset
        super().__init__(message)


class NotPositiveDefiniteError(AskoptError):
    """Cholesky factorization failed even at the largest allowed jitter."""

    def __init__(self, attempted_jitter):
        self.attempted_jitter = attempted_jitter
        super().__init__(
            f"matrix not positive definite after jitter up to {attempted_jitter:g}"
        )


class ConfigError(AskoptError):
    """A rule, model, or session configuration is inconsistent."""


class OptimizationError(AskoptError):
    """An optimizer could not produce any usable result."""


class ModelFitError(AskoptError):
    """Model refitting failed; ``record`` carries the still-valid previous state."""

    def __init__(self, message, record=None):
        self.record = record
        super().__init__(message)
