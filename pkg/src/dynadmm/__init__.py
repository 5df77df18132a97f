"""Dynamic ADMM: one-pass-per-slice tracking of time-varying coupled
problems, with per-slice oracles and convergence-bound audits."""

from .exceptions import (
    ConfigError,
    ConvergenceError,
    DomainError,
    DynAdmmError,
    NumericalError,
    ShapeError,
    UnsupportedOperationError,
)
from .metrics import (
    ConvexityConstants,
    DualPair,
    PairNormContext,
    audit_trajectory,
    constants_from_stream,
    max_contraction,
    pair_norm,
    sparsity_deviation,
    steady_state_bounds,
)
from .oracle import OptimalTriple, OracleConfig, kkt_residual, solve
from .problem import (
    FunctionSpec,
    LeastSquares,
    ProblemInstance,
    QuadraticForm,
    ScaledL1,
    augmented_lagrangian,
    evaluate,
    gradient,
    primal_residual,
)
from .solver import (
    AdmmState,
    SolverConfig,
    dual_update,
    initial_state,
    run_dynamic,
    soft_threshold,
    step,
    x_update,
    z_update,
)

__all__ = [
    "AdmmState",
    "ConfigError",
    "ConvergenceError",
    "ConvexityConstants",
    "DomainError",
    "DualPair",
    "DynAdmmError",
    "FunctionSpec",
    "LeastSquares",
    "NumericalError",
    "OptimalTriple",
    "OracleConfig",
    "PairNormContext",
    "ProblemInstance",
    "QuadraticForm",
    "ScaledL1",
    "ShapeError",
    "SolverConfig",
    "UnsupportedOperationError",
    "audit_trajectory",
    "augmented_lagrangian",
    "constants_from_stream",
    "dual_update",
    "evaluate",
    "gradient",
    "initial_state",
    "kkt_residual",
    "max_contraction",
    "pair_norm",
    "primal_residual",
    "run_dynamic",
    "soft_threshold",
    "solve",
    "sparsity_deviation",
    "steady_state_bounds",
    "step",
    "x_update",
    "z_update",
]

__version__ = "0.1.0"
