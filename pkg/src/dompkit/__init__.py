"""Greedy sparse recovery with dynamic support selection.

Solvers (OMP, gOMP, dynamic selection with and without hard
thresholding, CoSaMP, subspace pursuit), exact small-scale recovery
theory with verification suites, seeded benchmark sweeps, and a CLI.
"""

__version__ = "0.1.0"

from .algorithms import (
    ALGORITHMS,
    AlgorithmConfig,
    AlgorithmReport,
    IterateState,
    StoppingRule,
    ZeroResidualError,
    run,
)
from .bench import EnsembleSpec, SweepResult, generate_problem
from .linalg import (
    hard_threshold,
    restricted_least_squares,
    spectral_norm,
    top_q_indices,
)
from .theory import (
    BoundConstants,
    RicEstimate,
    bound_constants,
    domp_ric_bound,
    edomp_ric_bound,
    highest_rip_order,
    ric_exact,
    theta_constant,
)

__all__ = [
    "ALGORITHMS",
    "AlgorithmConfig",
    "AlgorithmReport",
    "BoundConstants",
    "EnsembleSpec",
    "IterateState",
    "RicEstimate",
    "StoppingRule",
    "SweepResult",
    "ZeroResidualError",
    "__version__",
    "bound_constants",
    "domp_ric_bound",
    "edomp_ric_bound",
    "generate_problem",
    "hard_threshold",
    "highest_rip_order",
    "restricted_least_squares",
    "ric_exact",
    "run",
    "spectral_norm",
    "theta_constant",
    "top_q_indices",
]
