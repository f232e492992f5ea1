"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class JacobiTraceError(Exception):
    """Base class for every error raised by this package."""


class SizeError(JacobiTraceError, ValueError):
    pass


class ShapeError(JacobiTraceError, ValueError):
    pass


class ConfigurationError(JacobiTraceError, ValueError):
    """Invalid sequence/experiment configuration.

    ``field`` names the offending configuration key when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class BoundViolationError(JacobiTraceError, ValueError):
    def __init__(self, k: int, i: int, value: float, bound: float):
        super().__init__(
            f"|value| = {abs(value)!r} exceeds bound {bound!r} at k={k}, i={i}"
        )
        self.k = k
        self.i = i
        self.value = value
        self.bound = bound


class ScalingError(JacobiTraceError, ValueError):
    pass


class SimilarityError(JacobiTraceError, ValueError):
    pass


class DomainError(JacobiTraceError, ValueError):
    pass


class ToleranceError(JacobiTraceError, ValueError):
    pass


class OverflowGuardError(JacobiTraceError, ValueError):
    pass


class RegressionError(JacobiTraceError, ValueError):
    pass


class ParameterError(JacobiTraceError, ValueError):
    pass


class RegistryError(JacobiTraceError, LookupError):
    pass
