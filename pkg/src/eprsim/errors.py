"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A scenario, document, or parameter violates an invariant.

    ``path`` locates the offending field when the error originates from a
    parsed document (e.g. ``observers.b.time``); it is empty for errors
    raised on programmatic input.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalFailure(RuntimeError):
    """A computation cannot produce a trustworthy number.

    Raised for boundary-mass violations on the lattice and for
    zero-probability cascades in the measurement pipeline.
    """
