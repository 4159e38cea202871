"""Fractional diffusion on directed graphs via rational Krylov methods
applied to desingularized graph Laplacians."""

from fraclap._backend import backend_name
from fraclap.desingularize import (
    apply_Q,
    apply_Qt,
    correct_sum,
    projected_operator,
    rank_one_operator,
    rank_one_recovery,
    shifted_solve_safe,
    split_b,
)
from fraclap.harness import (
    MethodConfig,
    all_method_configs,
    convergence_study,
    solve_fractional_diffusion,
    write_records_csv,
)
from fraclap.krylov import (
    LinearOperator,
    PoleSequence,
    StoppingRule,
    krylov_fAb,
    laplacian_operator,
    pole_sequence,
    rational_arnoldi_step,
    start_state,
)
from fraclap.laplacian import LaplacianSystem, build_laplacian, largest_scc
from fraclap.matfun import (
    FracExpParams,
    dense_frac_exp,
    dense_frac_pow,
    dense_reference,
    frac_exp_scalar,
)
from fraclap.solver import (
    LUFactors,
    Permutation,
    lu_factorize,
    null_left_vector,
    rcm_ordering,
    solve,
)
from fraclap.sparse import (
    SparseMatrix,
    from_coo,
    load_matrix_market,
    save_matrix_market,
    spmv,
    transpose,
)
from fraclap.spectral import (
    SpectralExtent,
    estimate_extents,
    estimate_lambda_2,
    estimate_lambda_max,
)

__version__ = "0.1.0"
