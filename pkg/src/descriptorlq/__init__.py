"""Finite-horizon LQ-optimal feedback for index-0 linear descriptor systems.

The pipeline splits d/dt E x = A x + B u into dynamical and algebraic
sub-states through spectral projectors of the pencil, solves a projected
differential Riccati equation plus a constant algebraic companion, lifts the
result to a projection-free feedback gain on the original coordinates, and
cross-validates optimality through a variational certificate, a fixed-point
solver, and a direct-transcription oracle.
"""

__version__ = "0.1.0"

from .control import (
    check_admissible,
    feedback_gain,
    minimum_cost,
    picard_solve,
    variation_gradient,
    variation_identity_check,
)
from .descriptor import (
    DescriptorSystem,
    PencilClass,
    SpectralProjectors,
    compute_projectors,
    semi_explicit_projectors,
    validate_pencil,
)
from .exceptions import (
    AssumptionViolated,
    DescriptorLQError,
    DimensionMismatch,
    GridMismatch,
    HigherIndex,
    InadmissibleVariation,
    IncompatibleWeights,
    InconsistentInitialData,
    InconsistentInput,
    IntegrationFailure,
    NewtonFailure,
    NoConvergence,
    NonSquare,
    OutOfGrid,
    ProjectionFailure,
    SingularA0,
    SingularClosedLoopCoupling,
    SingularElliptic,
    SingularKKT,
    SingularPencil,
    TooLarge,
)
from .fem import (
    ParabolicEllipticParams,
    assemble,
    instability_indicator,
    mass_matrix,
    stiffness_matrix,
)
from .grid import TimeGrid, TimeSeries
from .oracle import direct_transcription
from .pipeline import Synthesis, synthesize
from .riccati import (
    RiccatiSolution,
    lift_projection_free,
    perturb_general_solution,
    projection_free_residual,
    solve_algebraic_pi0,
    solve_projected_dre,
)
from .signals import ControlSignal, GainSchedule
from .simulate import (
    Trajectory,
    evaluate_cost,
    optimality_restart_deviation,
    simulate_closed_loop,
    simulate_open_loop,
)
from .weierstrass import (
    CompatibilityReport,
    QuadraticWeights,
    SplitWeights,
    WeierstrassForm,
    check_weight_compatibility,
    decompose,
    split_weights,
)

__all__ = [
    "__version__",
    "DescriptorSystem",
    "SpectralProjectors",
    "PencilClass",
    "validate_pencil",
    "compute_projectors",
    "semi_explicit_projectors",
    "WeierstrassForm",
    "QuadraticWeights",
    "SplitWeights",
    "CompatibilityReport",
    "decompose",
    "check_weight_compatibility",
    "split_weights",
    "RiccatiSolution",
    "solve_algebraic_pi0",
    "solve_projected_dre",
    "lift_projection_free",
    "projection_free_residual",
    "perturb_general_solution",
    "ControlSignal",
    "GainSchedule",
    "TimeGrid",
    "TimeSeries",
    "Trajectory",
    "simulate_open_loop",
    "simulate_closed_loop",
    "evaluate_cost",
    "optimality_restart_deviation",
    "feedback_gain",
    "check_admissible",
    "variation_gradient",
    "variation_identity_check",
    "picard_solve",
    "minimum_cost",
    "ParabolicEllipticParams",
    "assemble",
    "instability_indicator",
    "mass_matrix",
    "stiffness_matrix",
    "direct_transcription",
    "Synthesis",
    "synthesize",
    "DescriptorLQError",
    "AssumptionViolated",
    "DimensionMismatch",
    "GridMismatch",
    "HigherIndex",
    "InadmissibleVariation",
    "IncompatibleWeights",
    "InconsistentInitialData",
    "InconsistentInput",
    "IntegrationFailure",
    "NewtonFailure",
    "NoConvergence",
    "NonSquare",
    "OutOfGrid",
    "ProjectionFailure",
    "SingularA0",
    "SingularClosedLoopCoupling",
    "SingularElliptic",
    "SingularKKT",
    "SingularPencil",
    "TooLarge",
]
