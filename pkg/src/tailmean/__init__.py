"""Mean estimation for heavy-tailed distributions with infinite variance.

A bias-reduced mean estimator built on joint first/second-order tail-index
estimation, alongside the classical Hill/Weissman/Peng machinery, adaptive
sample-fraction selection, asymptotic confidence intervals, normality
diagnostics, and a reproducible Monte Carlo harness.
"""

from .classic import PengEstimate, hill, k_opt, peng_mean, peng_variance, weissman_quantile
from .cml import (
    CmlEstimate,
    ConfidenceInterval,
    MeanEstimate,
    br_mean,
    chat_dhat,
    cml_solve,
    confidence_interval,
    g_i,
    h_func,
    lpy_quantile,
    sigma2,
    solve_alpha_beta,
)
from .dist import (
    FRECHET,
    PARETO,
    HallConstants,
    HeavyTailModel,
    model_cdf,
    model_hall_constants,
    model_quantile,
    model_sample,
    model_true_mean,
)
from .empirical import (
    SortedSample,
    TailView,
    empirical_quantile,
    lower_tail_mean,
    order_stat,
    read_value_column,
    tail_view,
)
from .errors import (
    DataError,
    DegenerateModelError,
    DegenerateSampleError,
    DegenerateTailError,
    EstimationError,
    InfiniteMeanError,
    InvalidScaleError,
    NonConvergenceError,
)
from .gof import TestResult, cvm_test, ks_test, normality_battery, pearson_test, shapiro_wilk
from .ksel import KSelection, default_k_range, reiss_thomas
from .mc import (
    ExperimentConfig,
    ExperimentReport,
    report_to_csv,
    report_to_json,
    run_bias_rmse,
    run_coverage,
    run_normality,
    run_replications,
)
from .rng import DEFAULT_SEED, derive_seed, make_rng

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "FRECHET",
    "PARETO",
    "CmlEstimate",
    "ConfidenceInterval",
    "DataError",
    "DegenerateModelError",
    "DegenerateSampleError",
    "DegenerateTailError",
    "EstimationError",
    "ExperimentConfig",
    "ExperimentReport",
    "HallConstants",
    "HeavyTailModel",
    "InfiniteMeanError",
    "InvalidScaleError",
    "KSelection",
    "MeanEstimate",
    "NonConvergenceError",
    "PengEstimate",
    "SortedSample",
    "TailView",
    "TestResult",
    "br_mean",
    "chat_dhat",
    "cml_solve",
    "confidence_interval",
    "cvm_test",
    "default_k_range",
    "derive_seed",
    "empirical_quantile",
    "g_i",
    "h_func",
    "hill",
    "k_opt",
    "ks_test",
    "lower_tail_mean",
    "lpy_quantile",
    "make_rng",
    "model_cdf",
    "model_hall_constants",
    "model_quantile",
    "model_sample",
    "model_true_mean",
    "normality_battery",
    "order_stat",
    "pearson_test",
    "peng_mean",
    "peng_variance",
    "read_value_column",
    "reiss_thomas",
    "report_to_csv",
    "report_to_json",
    "run_bias_rmse",
    "run_coverage",
    "run_normality",
    "run_replications",
    "shapiro_wilk",
    "sigma2",
    "solve_alpha_beta",
    "tail_view",
    "weissman_quantile",
]
