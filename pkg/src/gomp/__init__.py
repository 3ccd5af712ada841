"""Greedy sparse recovery: OMP / generalized OMP, RIP certification,
recovery-bound constants, inequality verifiers, and a reproducible
Monte-Carlo benchmark harness."""

__version__ = "0.1.0"

from .linalg import (
    IncrementalQR,
    LsSolution,
    SingularSystemError,
    append_columns,
    as_index_set,
    as_matrix,
    correlations,
    least_squares,
    load_matrix_bin,
    load_matrix_csv,
    save_matrix_bin,
    save_matrix_csv,
)
from .pursuit import (
    PursuitConfig,
    PursuitResult,
    PursuitTrace,
    gomp_solve,
    identify_top_s,
    omp_solve,
    prune_to_k,
)
from .theory import (
    BoundDomainError,
    BoundReport,
    BudgetExceededError,
    ConditionNotCertifiedError,
    PartitionReport,
    RicCalculator,
    RicEstimate,
    bound_constants,
    check_condition,
    check_lemma1,
    check_prop1,
    check_prop2,
    check_theorem_residual,
    condition_order,
    partition,
    perturbed_orthonormal,
    ric_certified_upper,
    ric_exact,
    ric_monte_carlo,
    run_verification_corpus,
)
from .experiments import (
    SparseSignal,
    TrialSpec,
    gen_matrix,
    gen_noise,
    gen_signal,
    linear_mmse,
    oracle_ls,
    run_compressible,
    run_mse_sweep,
    run_timing_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
