"""Approximate nonnegative matrix factorization under the I-divergence
(generalized Kullback-Leibler) objective.

The package factors a nonnegative matrix as V ~ W @ H by alternating two
closed-form divergence projections in a lifted three-index space, and
exposes the exact identities behind the descent (Pythagorean splits, the
two-part gain decomposition, auxiliary-function gaps, first-order
stationarity conditions) as machine-checkable diagnostics.
"""

from .core import (
    CONSTRUCTION_TOL,
    INPUT_TOL,
    DegenerateMatrixError,
    FactorPair,
    ScaledProblem,
    as_nonneg_matrix,
    as_nonneg_tensor,
    as_prob_matrix,
    as_prob_tensor,
    denormalize_solution,
    hellinger_tensor,
    i_div_matrix,
    i_div_scalar,
    i_div_tensor,
    normalize_problem,
)
from .diagnostics import (
    AuxEval,
    FiniteDifferenceError,
    KktReport,
    aux_full,
    aux_gain_identities,
    aux_left,
    aux_right,
    finite_diff_grad,
    grad,
    kkt_report,
)
from .lifted import (
    MembershipCheck,
    collapse,
    factor_projection,
    has_marginal,
    is_product,
    marginal_projection,
    pythagorean_residual_factor,
    pythagorean_residual_marginal,
    tensor_from_pair,
)
from .solver import (
    DEAD_COLUMN_TOL,
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    STATUS_UNDERFLOW,
    IdentityViolationError,
    IterationRecord,
    SolveResult,
    SolverConfig,
    UnderflowError,
    gain_components,
    init_deterministic,
    init_random,
    solve,
    step_sequential,
    step_simultaneous,
    step_unnormalized,
)

__version__ = "0.1.0"

__all__ = [
    "AuxEval",
    "CONSTRUCTION_TOL",
    "DEAD_COLUMN_TOL",
    "DegenerateMatrixError",
    "FactorPair",
    "FiniteDifferenceError",
    "INPUT_TOL",
    "IdentityViolationError",
    "IterationRecord",
    "KktReport",
    "MembershipCheck",
    "STATUS_CONVERGED",
    "STATUS_MAX_ITERS",
    "STATUS_UNDERFLOW",
    "ScaledProblem",
    "SolveResult",
    "SolverConfig",
    "UnderflowError",
    "as_nonneg_matrix",
    "as_nonneg_tensor",
    "as_prob_matrix",
    "as_prob_tensor",
    "aux_full",
    "aux_gain_identities",
    "aux_left",
    "aux_right",
    "collapse",
    "denormalize_solution",
    "factor_projection",
    "finite_diff_grad",
    "gain_components",
    "grad",
    "has_marginal",
    "hellinger_tensor",
    "i_div_matrix",
    "i_div_scalar",
    "i_div_tensor",
    "init_deterministic",
    "init_random",
    "is_product",
    "kkt_report",
    "marginal_projection",
    "normalize_problem",
    "pythagorean_residual_factor",
    "pythagorean_residual_marginal",
    "solve",
    "step_sequential",
    "step_simultaneous",
    "step_unnormalized",
    "tensor_from_pair",
    "__version__",
]
