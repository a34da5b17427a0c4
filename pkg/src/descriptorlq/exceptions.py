"""Exception hierarchy for the descriptor LQ pipeline.

All numerical failures raise a subclass of :class:`DescriptorLQError` so
callers can distinguish bad problem data from genuine bugs.
"""


class DescriptorLQError(Exception):
    """Base class for all errors raised by this package."""


class NonSquare(DescriptorLQError):
    """The pencil is rectangular; only square pencils are supported."""


class SingularPencil(DescriptorLQError):
    """det(lambda*E - A) vanishes identically within tolerance."""


class HigherIndex(DescriptorLQError):
    """The pencil's infinite eigenvalues are not semi-simple (nilpotency >= 2)."""


class ProjectionFailure(DescriptorLQError):
    """Eigenvalue reordering or the decoupling solve failed or is ill-conditioned."""


class AssumptionViolated(DescriptorLQError):
    """A structural requirement of the decomposition fails (which one is in the message)."""


class IncompatibleWeights(DescriptorLQError):
    """Cost weights couple the dynamical and algebraic subspaces."""


class SingularA0(DescriptorLQError):
    """The algebraic block is numerically singular."""


class SingularElliptic(DescriptorLQError):
    """The discrete elliptic operator K + gamma*M is singular."""


class IntegrationFailure(DescriptorLQError):
    """The Riccati integrator failed (blow-up or step-size underflow)."""


class OutOfGrid(DescriptorLQError):
    """A time query lies outside the stored time grid."""


class DimensionMismatch(DescriptorLQError):
    """Operand dimensions are incompatible."""


class GridMismatch(DescriptorLQError):
    """Two time-sampled quantities live on different grids."""


class InadmissibleVariation(DescriptorLQError):
    """A control variation violates the initial consistency constraint."""


class NoConvergence(DescriptorLQError):
    """Fixed-point iteration exceeded max_iter without meeting tolerance."""


class InconsistentInitialData(DescriptorLQError):
    """No admissible control can match the algebraic initial sub-state."""


class InconsistentInput(DescriptorLQError):
    """A control/initial-state pair violates the consistency condition."""


class NewtonFailure(DescriptorLQError):
    """Implicit time step failed to solve."""


class SingularClosedLoopCoupling(DescriptorLQError):
    """The joint control/algebraic-state solve is singular."""


class TooLarge(DescriptorLQError):
    """Problem size exceeds the dense-solve guard."""


class SingularKKT(DescriptorLQError):
    """The transcription KKT system is singular."""
