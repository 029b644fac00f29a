"""Exception hierarchy shared by every module."""

from __future__ import annotations


class O2EstError(Exception):
    """Base class for all errors raised by the workbench."""


class InputError(O2EstError, ValueError):
    """Malformed or non-finite input, unknown identifiers, bad shapes."""


class PreconditionError(O2EstError, ValueError):
    """Input is well-formed but violates a stated precondition."""


class ResourceError(O2EstError):
    """A configured dimension or size cap would be exceeded."""


class DegenerateSpectrumError(PreconditionError):
    """A spectral function was asked to evaluate at a forbidden point."""

    def __init__(self, message: str, eigenvalue: complex | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NotInvertibleError(PreconditionError):
    """An element that must be invertible (in a corner) is not."""


class OutOfRangeError(PreconditionError):
    """A scalar parameter lies outside the supported range."""


class ConstructionFailedError(O2EstError):
    """A constructive procedure hit a genuine finite-dimensional obstruction."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class ConstructionDegenerateError(O2EstError):
    """A construction produced an object outside its error budget."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = list(trace or [])


class OracleError(O2EstError):
    """A fiber oracle could not answer a query."""

    def __init__(self, message: str, location: object = None):
        super().__init__(message)
        self.location = location
