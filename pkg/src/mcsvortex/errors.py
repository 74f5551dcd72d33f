"""Exception hierarchy shared by all solver modules."""


class MCSVortexError(Exception):
    """Base class for all package errors."""


class GridMismatch(MCSVortexError):
    """Two fields that must share a grid were built on different grids."""


class PreconditionViolated(MCSVortexError):
    """An operation was called outside its admissible parameter range."""


class NoConvergence(MCSVortexError):
    """An iterative solve stalled before reaching its tolerance."""

    def __init__(self, iterations: int, residual: float, what: str = "iteration"):
        self.iterations = iterations
        self.residual = residual
        self.what = what
        super().__init__(
            f"{what} did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class SigmaTooSmall(MCSVortexError):
    """Mollification width below the 2h resolvability floor."""


class NegativeArgument(MCSVortexError):
    """Nonlinearity evaluated at a negative argument."""


class OutOfRange(MCSVortexError):
    """Inverse nonlinearity queried outside [f(0), f(T))."""


class QTooSmall(MCSVortexError):
    """Coupling q fell at or below the sup norm of the zeroth-order coefficient."""


class BoundsViolation(MCSVortexError):
    """A converged state broke the pointwise bounds by more than bound_tol.

    Signals a discretization failure (e.g. under-resolved mollification),
    not a solver bug.
    """


class ConfigError(MCSVortexError):
    """Malformed or inconsistent run configuration."""


class SnapshotError(MCSVortexError):
    """Unreadable, corrupt, or grid-mismatched field snapshot."""
