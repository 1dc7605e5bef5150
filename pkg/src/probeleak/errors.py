"""Exception hierarchy shared by the library, CLI, and service layers.

Each class maps to a stable CLI exit code and HTTP status:

    InputError                -> exit 1, HTTP 422
    CapacityError             -> exit 2, HTTP 413
    InternalConsistencyError  -> exit 3, HTTP 500
"""


class ProbeleakError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ProbeleakError):
    """Invalid argument, malformed file, or violated precondition."""


class CapacityError(ProbeleakError):
    """Request exceeds a hard resource cap (depth, table size)."""


class InternalConsistencyError(ProbeleakError):
    """A computed quantity violated an internal invariant; indicates a bug."""
