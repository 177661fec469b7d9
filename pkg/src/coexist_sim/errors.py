"""Exception types shared across the simulator."""


class CoexistSimError(Exception):
    """Base class for all simulator errors."""


class DimensionMismatch(CoexistSimError):
    """Operands do not conform."""


class DomainError(CoexistSimError):
    """Scalar argument outside its admissible range."""


class NotPositiveDefinite(CoexistSimError):
    """Matrix expected to be Hermitian positive definite is not."""


class NotHermitian(CoexistSimError):
    """Matrix expected to be Hermitian (within tolerance) is not."""


class ConvergenceFailure(CoexistSimError):
    """Iterative factorization did not converge."""


class FullRankNullSpace(CoexistSimError):
    """Stacked interference channel has full column rank: null space is empty."""


class SingularCovariance(CoexistSimError):
    """Covariance matrix is singular where an inverse is required."""


class DegenerateSteering(CoexistSimError):
    """GLRT denominator vanished (steering fully nulled by the projector)."""


class InfeasibleDimensions(CoexistSimError):
    """Problem assembly received dimensions it cannot support."""


class SdpInfeasible(CoexistSimError):
    """SDP reported (certified or strongly suspected) infeasibility."""

    def __init__(self, message, failing_constraints=None):
        super().__init__(message)
        self.failing_constraints = failing_constraints or []


class SdpSolveError(CoexistSimError):
    """SDP solver failed numerically or hit its iteration limit."""
