"""Exception types raised across the package."""


class DhlsError(Exception):
    """Base class for all package errors."""


class GridRangeError(DhlsError, IndexError):
    """A lattice point or linear index lies outside its grid."""


class DimensionError(DhlsError, ValueError):
    """Vector or matrix shape does not match the operator."""


class CapacityError(DhlsError, MemoryError):
    """A dense construction was requested above the configured size limit."""


class ContractError(DhlsError, ValueError):
    """A documented precondition was violated."""


class ConvergenceError(DhlsError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``partial`` carries whatever the solver had when it stopped, so callers
    can still inspect the last iterate and its residual.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
