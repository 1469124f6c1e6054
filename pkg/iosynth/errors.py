"""
Exception hierarchy for iosynth

Infeasibility is not an error anywhere in the package: synthesis returns None
for it. Everything below signals that a result could not be produced at all.
"""


class IOSynthError(Exception):
    """Base class for every error raised by iosynth"""

    exit_code = 1


class InputError(IOSynthError, ValueError):
    """Malformed model files, inconsistent dimensions, invalid bounds or grids"""

    exit_code = 3


class ShapeError(InputError):
    """Matrix shapes are incompatible for the requested operation"""


class EigenDecompositionError(IOSynthError):
    """The eigenvalue iteration did not converge"""

    exit_code = 4


class AssumptionViolation(IOSynthError, ValueError):
    """A coordinate transformation does not satisfy the diagonal Schur condition"""

    exit_code = 3


class SolverFailure(IOSynthError):
    """The conic backend failed numerically (distinct from declared infeasibility)"""

    exit_code = 4


class BracketError(InputError):
    """A bisection bracket does not straddle the feasibility boundary"""


class DiscretizationBoundExceeded(IOSynthError):
    """A measured Euler defect is larger than the declared disturbance bound"""

    exit_code = 4


class StageError(IOSynthError):
    """A pipeline stage failed; carries the stage name and the original cause"""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
