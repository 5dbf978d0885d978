"""Fitting, inference, and model selection for zero-inflated and hurdle
models on sparse univariate data."""

__version__ = "0.1.0"

from .families import Family
from .fisher import (
    ConfidenceIntervals,
    FisherMatrix,
    MonteCarloConfig,
    confidence_intervals,
    expected_trigamma,
    fisher_baseline,
    fisher_hurdle,
    fisher_zazi,
    fisher_zero_inflated,
    inverse_fisher,
    inverse_fisher_zi,
    test_zero_alteration,
)
from .gof import (
    KsReport,
    LrtReport,
    SelectionReport,
    ks_statistic,
    kstest_A,
    kstest_B,
    lrt_bootstrap,
    model_select,
)
from .mle import (
    FitCase,
    FitResult,
    OptimizerConfig,
    fit_baseline,
    fit_hurdle,
    fit_integer_size,
    fit_model,
    fit_truncated,
    fit_zazi,
    fit_zero_inflated,
    log_likelihood,
    maximize_bounded,
)
from .models import (
    ModelKind,
    ModelParams,
    ModelSpec,
    make_cdf,
    model_cdf,
    model_log_density,
    parse_spec_token,
    sample_model,
    spec_token,
    za_to_zi,
    zi_to_za,
)

__all__ = [
    "__version__",
    "Family",
    "ModelKind",
    "ModelSpec",
    "ModelParams",
    "FitCase",
    "FitResult",
    "OptimizerConfig",
    "MonteCarloConfig",
    "FisherMatrix",
    "ConfidenceIntervals",
    "KsReport",
    "LrtReport",
    "SelectionReport",
    "model_log_density",
    "model_cdf",
    "make_cdf",
    "sample_model",
    "zi_to_za",
    "za_to_zi",
    "spec_token",
    "parse_spec_token",
    "fit_model",
    "fit_hurdle",
    "fit_zero_inflated",
    "fit_zazi",
    "fit_baseline",
    "fit_truncated",
    "fit_integer_size",
    "log_likelihood",
    "maximize_bounded",
    "fisher_hurdle",
    "fisher_zero_inflated",
    "fisher_zazi",
    "fisher_baseline",
    "inverse_fisher",
    "inverse_fisher_zi",
    "expected_trigamma",
    "confidence_intervals",
    "test_zero_alteration",
    "ks_statistic",
    "kstest_A",
    "kstest_B",
    "lrt_bootstrap",
    "model_select",
]
