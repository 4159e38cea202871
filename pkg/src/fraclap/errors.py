"""Exception hierarchy shared across the package."""


class FraclapError(Exception):
    """Base class for all package-specific failures."""


class ParseError(FraclapError):
    """Malformed or unsupported Matrix Market input."""


class GraphStructureError(FraclapError):
    """Input graph violates a structural requirement (self-loop, negative
    weight, non-square adjacency, missing strong connectivity)."""


class PivotBreakdownError(FraclapError):
    """Gaussian elimination hit a zero/near-zero pivot where none is allowed."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"pivot breakdown at elimination step {step}")


class SingularSolveError(FraclapError):
    """Triangular solve requested on factors flagged as singular."""


class BranchCutError(FraclapError):
    """Scalar or eigenvalue falls on the negative real axis where the
    fractional power is not defined."""


class IllConditionedError(FraclapError):
    """Dense function evaluation failed: eigenvector basis remained
    ill-conditioned after perturbation retries."""
