"""Recovery of spectrally sparse signals from partial samples.

A signal that is a superposition of a few complex sinusoids at arbitrary
continuous frequencies fills a square Hankel matrix of low rank. This
package completes that matrix from randomly observed time samples by
alternating relaxed projections onto the rank constraint and onto the
data-consistent Hankel set, entirely in O(n R) memory, with an optional
FISTA-style accelerated variant, and ships a reproducible command-line
experiment harness on top.
"""

from .dense_guard import (
    DenseMaterializationError,
    dense_limit,
    dense_threshold,
    set_dense_threshold,
)
from .hankel import (
    HankelVector,
    ObservationSet,
    antidiag_sums_lowrank,
    antidiag_weights,
    hankel_adjoint_matvec,
    hankel_dense,
    hankel_frobenius_sq,
    hankel_matvec,
    hankel_operator,
    inner_product_lowrank_hankel,
    project_dense_to_hankel,
    project_hankel_blend,
)
from .lowrank import (
    LinearOperator,
    LowRankFactors,
    SvdConvergenceError,
    lowrank_matvec,
    project_rank,
    truncated_svd,
)
from .signal import (
    PencilConditionError,
    SampleInstance,
    SpectralModel,
    extract_frequencies,
    make_instance,
    random_model,
    random_observations,
    relative_error,
    synthesize,
)
from .solver import (
    IterateState,
    RecoveryResult,
    SolverConfig,
    fista_step,
    init_state,
    objective,
    pgd_step,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "DenseMaterializationError",
    "HankelVector",
    "IterateState",
    "LinearOperator",
    "LowRankFactors",
    "ObservationSet",
    "PencilConditionError",
    "RecoveryResult",
    "SampleInstance",
    "SolverConfig",
    "SpectralModel",
    "SvdConvergenceError",
    "antidiag_sums_lowrank",
    "antidiag_weights",
    "dense_limit",
    "dense_threshold",
    "extract_frequencies",
    "fista_step",
    "hankel_adjoint_matvec",
    "hankel_dense",
    "hankel_frobenius_sq",
    "hankel_matvec",
    "hankel_operator",
    "init_state",
    "inner_product_lowrank_hankel",
    "lowrank_matvec",
    "make_instance",
    "objective",
    "pgd_step",
    "project_dense_to_hankel",
    "project_hankel_blend",
    "project_rank",
    "random_model",
    "random_observations",
    "relative_error",
    "set_dense_threshold",
    "solve",
    "synthesize",
    "truncated_svd",
    "__version__",
]
