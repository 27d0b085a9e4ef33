"""Exception types shared across the package."""


class RobinlapError(Exception):
    """Base class for all package-specific errors."""


class CutViolationError(RobinlapError, ValueError):
    """The spectral parameter lies on the essential-spectrum cut [0, inf)."""


class GridMismatchError(RobinlapError, ValueError):
    """Operands live on different grids."""


class ContractionError(RobinlapError, RuntimeError):
    """An operator required to be a strict contraction has norm >= 1."""

    def __init__(self, message, norm_estimate=None):
        super().__init__(message)
        self.norm_estimate = norm_estimate


class ConvergenceError(RobinlapError, RuntimeError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class Lambda0SearchError(RobinlapError, RuntimeError):
    """The shift search hit its cap before certifying the contraction."""

    def __init__(self, message, achieved_norm=None, lambda_reached=None):
        super().__init__(message)
        self.achieved_norm = achieved_norm
        self.lambda_reached = lambda_reached


class ConstraintSingularError(RobinlapError, ValueError):
    """Ghost elimination for a boundary condition degenerates."""


class SpectralCollisionError(RobinlapError, ValueError):
    """The spectral parameter collides with an eigenvalue."""


class IndefiniteSystemError(RobinlapError, RuntimeError):
    """A form-method system expected to be definite is not."""
