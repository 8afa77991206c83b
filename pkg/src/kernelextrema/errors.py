"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument left its mathematical domain (boundary point, bad exponent, ...)."""


class ConvergenceError(RuntimeError):
    """A refinement loop hit its budget before reaching the requested tolerance.

    Carries the trailing estimates so callers can judge how close the run got.
    """

    def __init__(self, message: str, history=()):
        super().__init__(message)
        self.history = tuple(history)


class PrecisionError(RuntimeError):
    """A numeric routine cannot certify the requested accuracy."""


class DegenerateContourError(RuntimeError):
    """Level-curve extraction hit a critical level; retry at a nearby level."""
