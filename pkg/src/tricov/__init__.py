"""Covariance kernel estimation for synchronously observed noisy curves.

Empirical covariances of pairs ``j < k`` are smoothed by a bivariate local
polynomial on the upper triangle ``x <= y``; the diagonal, which carries the
noise variance, never enters the fit.
"""

from ._backend import BACKEND, available_backends, get_backend
from .basis import KernelKind, basis_len, kernel_eval, monomial_vector
from .cv import CVPlan, CVReport, h_grid, kfold_cv
from .estimator import (
    CovarianceSurface,
    EmpiricalCovariance,
    StdCurve,
    correlation_surface,
    empirical_covariance,
    estimate,
    mirror_query,
    smooth_covariance,
    std_curve,
)
from .experiments import (
    ExperimentReport,
    bandwidth_sweep,
    clt_check,
    decomposition_study,
    estimator_comparison,
    rate_table,
    sup_error,
)
from .grid import (
    DesignGrid,
    TriangleGrid,
    lattice_eval_grid,
    make_density_grid,
    make_equidistant_grid,
    offdiagonal_eval_grid,
    triangle_eval_grid,
)
from .processes import (
    BrownianMotion,
    OUProcess,
    TwoTermProcess,
    add_noise,
    bm_kernel,
    make_process,
    ou_kernel,
    two_term_kernel,
)
from .rng import RngSpec
from .weights import (
    PairDomain,
    SmootherConfig,
    WeightField,
    build_gram,
    compute_weight_field,
    verify_weight_axioms,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "KernelKind",
    "basis_len",
    "kernel_eval",
    "monomial_vector",
    "CVPlan",
    "CVReport",
    "h_grid",
    "kfold_cv",
    "CovarianceSurface",
    "EmpiricalCovariance",
    "StdCurve",
    "correlation_surface",
    "empirical_covariance",
    "estimate",
    "mirror_query",
    "smooth_covariance",
    "std_curve",
    "ExperimentReport",
    "bandwidth_sweep",
    "clt_check",
    "decomposition_study",
    "estimator_comparison",
    "rate_table",
    "sup_error",
    "DesignGrid",
    "TriangleGrid",
    "lattice_eval_grid",
    "make_density_grid",
    "make_equidistant_grid",
    "offdiagonal_eval_grid",
    "triangle_eval_grid",
    "BrownianMotion",
    "OUProcess",
    "TwoTermProcess",
    "add_noise",
    "bm_kernel",
    "make_process",
    "ou_kernel",
    "two_term_kernel",
    "RngSpec",
    "PairDomain",
    "SmootherConfig",
    "WeightField",
    "build_gram",
    "compute_weight_field",
    "verify_weight_axioms",
]
