"""Proximal point method for vector optimization on Hadamard manifolds."""
from .cone import (
    ConeError,
    GeneratorSet,
    check_direction,
    default_direction,
    in_cone,
    leq_C,
    make_generator_set,
    scalarize,
    scalarize_inf_oracle,
)
from .config import ConfigError, RunConfig, build, load_config
from .estimator import VectorProximalPoint, check_start_points
from .manifold import Euclidean, Hyperboloid, Manifold, ManifoldError, make_manifold
from .problem import ProblemInstance, VectorObjective, c_convexity_audit, make_builtin
from .proxpoint import (
    OuterConfig,
    SolveTrace,
    descent_audit,
    fejer_audit,
    grid_scalarization_check,
    read_trace_csv,
    run,
    write_trace_csv,
)
from .sharpness import SharpnessQuery, estimate_sharpness_modulus, scalar_transfer_audit
from .subsolver import InnerConfig, SubproblemSpec, solve_subproblem

__version__ = "0.1.0"
