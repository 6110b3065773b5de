"""Sparse precision matrix estimation by l1-penalized Gaussian likelihood.

The default solver runs block coordinate descent directly on the precision
matrix (primal and dual column backends); a classic covariance-side solver is
kept as an independent baseline. Data generators, support metrics and a small
benchmark harness round out the toolkit.
"""

__version__ = "0.1.0"

from .classic import DualState, block_inverse_identities, glasso_solve
from .datagen import (
    Dataset,
    GroundTruth,
    gen_ar2_precision,
    gen_sparse_precision,
    lambda_grid,
    lambda_max,
    sample_gaussian,
)
from .evaluation import (
    EdgeSet,
    OracleSearchResult,
    PathEntry,
    PathResult,
    RocCurve,
    count_off_diagonal_zeros,
    oracle_lambda_search,
    path_solve,
    roc_auc,
    screen_components,
    shd,
    support_edges,
)
from .linalg import (
    CholFactor,
    NotPositiveDefiniteError,
    Partition,
    chol,
    load_matrix_csv,
    logdet_spd,
    min_eigenvalue,
    partition_column,
    reassemble,
    rel_frobenius_diff,
    save_matrix_csv,
    solve_spd,
    spd_inverse,
    validate_symmetric,
)
from .solver import (
    ZERO_THRESHOLD,
    ColumnParams,
    Estimate,
    SolverConfig,
    SolveTrace,
    check_stationarity,
    decoupled_column_objective,
    gamma_update,
    objective,
    solve,
    sweep_column,
)
from .subproblems import (
    BoxQpProblem,
    LassoProblem,
    NonFiniteError,
    SubproblemSolution,
    box_dual_objective,
    box_qp_cd,
    lasso_cd,
    lasso_objective,
    recover_from_dual,
    soft_threshold,
)

__all__ = [
    "__version__",
    "BoxQpProblem", "CholFactor", "ColumnParams", "Dataset", "DualState",
    "EdgeSet", "Estimate", "GroundTruth", "LassoProblem",
    "NonFiniteError", "NotPositiveDefiniteError", "OracleSearchResult",
    "Partition", "PathEntry", "PathResult", "RocCurve", "SolveTrace",
    "SolverConfig", "SubproblemSolution", "ZERO_THRESHOLD",
    "block_inverse_identities", "box_dual_objective", "box_qp_cd",
    "check_stationarity", "chol", "count_off_diagonal_zeros",
    "decoupled_column_objective", "gamma_update", "gen_ar2_precision",
    "gen_sparse_precision", "glasso_solve", "lambda_grid", "lambda_max",
    "lasso_cd", "lasso_objective", "load_matrix_csv", "logdet_spd",
    "min_eigenvalue", "objective", "oracle_lambda_search", "partition_column",
    "path_solve", "reassemble", "recover_from_dual", "rel_frobenius_diff",
    "roc_auc", "sample_gaussian", "save_matrix_csv", "screen_components",
    "shd", "soft_threshold", "solve", "solve_spd", "spd_inverse",
    "support_edges", "sweep_column", "validate_symmetric",
]
