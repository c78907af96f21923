"""Fitting and comparison of discrete heavy-tailed distributions on count data."""

from .comparison import ComparisonOutcome, lrt_test, vuong_test
from .dataset import CountDataset, TruncatedView, load_counts, tail_ccdf, truncate
from .fitting import (
    FitResult,
    XminScanResult,
    fit_hooked,
    fit_lognormal,
    fit_power_law,
    neg_log_likelihood,
    scan_x_min,
)
from .kernels import (
    DiscreteDistribution,
    DiscreteLognormalParams,
    HookedPowerLawParams,
    PowerLawParams,
    normalization_constant,
    normalization_constants,
    unnormalized_weight,
)
from .simulation import (
    AttachmentParams,
    CIWidthGrid,
    LLContourGrid,
    RidgeReport,
    attachment_to_hooked,
    ci_width_study,
    hooked_to_attachment,
    ll_contour,
    lognormal_ci_study,
    ridge_demo,
    slope_tolerance_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "AttachmentParams",
    "CIWidthGrid",
    "ComparisonOutcome",
    "CountDataset",
    "DiscreteDistribution",
    "DiscreteLognormalParams",
    "FitResult",
    "HookedPowerLawParams",
    "LLContourGrid",
    "PowerLawParams",
    "RidgeReport",
    "TruncatedView",
    "XminScanResult",
    "attachment_to_hooked",
    "ci_width_study",
    "fit_hooked",
    "fit_lognormal",
    "fit_power_law",
    "hooked_to_attachment",
    "ll_contour",
    "load_counts",
    "lognormal_ci_study",
    "lrt_test",
    "neg_log_likelihood",
    "normalization_constant",
    "normalization_constants",
    "ridge_demo",
    "scan_x_min",
    "slope_tolerance_threshold",
    "tail_ccdf",
    "truncate",
    "unnormalized_weight",
    "vuong_test",
]
