"""Rank-based Gaussian-copula VAR estimation, contemporaneous causal
discovery, and impulse responses for possibly fat-tailed time series."""

from .errors import CopulaVarError, IdentificationError, NumericalError
from .irf import (
    EmpiricalMarginal,
    IrfRequest,
    irf_linearized,
    irf_mc,
    marginal_inverse,
    sigma_xi_from_model,
)
from .pcdag import (
    Cpdag,
    PcConfig,
    discover_cpdag,
    fisher_z_decision,
    fixed_gaps_from_support,
    orient_edges,
    partial_correlation,
    pc_skeleton,
)
from .precision import (
    SparsePrecision,
    SupportPattern,
    VarParams,
    clime_column,
    estimate_precision,
    lasso_neighborhood,
    refit_precision,
    threshold_support,
    var_params,
)
from .scaling import (
    LaggedDesign,
    Panel,
    ScalingMatrix,
    build_lagged,
    load_panel_csv,
    psd_repair,
    scaling_matrix,
    spearman_rho,
)
from .simulate import (
    SimDesign,
    SimTruth,
    generate_cluster_var,
    lyapunov_variance,
    reference_cpdag,
    run_benchmark,
    shd,
    structure_h,
    support_confusion,
)
from .svar import StructuralModel, ma_coefficients, parent_sets, structural_coefficients
from .tuning import CvPlan, aic_lag_order, cross_validate, cv_score, lambda_zero_search

__version__ = "0.1.0"

__all__ = [
    "CopulaVarError",
    "IdentificationError",
    "NumericalError",
    "Panel",
    "LaggedDesign",
    "ScalingMatrix",
    "load_panel_csv",
    "build_lagged",
    "spearman_rho",
    "scaling_matrix",
    "psd_repair",
    "SupportPattern",
    "SparsePrecision",
    "VarParams",
    "lasso_neighborhood",
    "clime_column",
    "threshold_support",
    "refit_precision",
    "var_params",
    "estimate_precision",
    "Cpdag",
    "PcConfig",
    "partial_correlation",
    "fisher_z_decision",
    "pc_skeleton",
    "orient_edges",
    "discover_cpdag",
    "fixed_gaps_from_support",
    "StructuralModel",
    "parent_sets",
    "structural_coefficients",
    "ma_coefficients",
    "EmpiricalMarginal",
    "IrfRequest",
    "marginal_inverse",
    "sigma_xi_from_model",
    "irf_mc",
    "irf_linearized",
    "CvPlan",
    "cv_score",
    "lambda_zero_search",
    "cross_validate",
    "aic_lag_order",
    "SimDesign",
    "SimTruth",
    "structure_h",
    "lyapunov_variance",
    "generate_cluster_var",
    "reference_cpdag",
    "shd",
    "support_confusion",
    "run_benchmark",
]
