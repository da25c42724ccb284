"""Exception types shared across the package."""


class HexwalkError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(HexwalkError, ValueError):
    """A parameter violates its documented precondition."""


class ResourceLimitError(HexwalkError):
    """A request exceeds a configured resource cap (e.g. evolution length)."""


class UnsupportedParametersError(HexwalkError, ValueError):
    """A parameter combination outside the supported (terminating) regime."""


class NumericalFailureError(HexwalkError):
    """An iterative solver failed to converge.

    Carries the last iterate so callers can inspect or restart.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
