"""Quantify and diagnose target imbalance in regression datasets."""

__version__ = "0.1.0"

from .empirical import EmpiricalCdf, HistogramDensity, Sample, build_histogram, density_at, ecdf_eval
from .evaluation import (
    PredictionSet,
    binned_mae,
    classification_metrics,
    f_score,
    overall_mae,
    regression_precision_recall,
    weighted_mae,
)
from .imbalance import (
    ImbalanceReport,
    classification_imbalance_factor,
    imbalance_report,
    kolmogorov_distance,
    mu_balance_check,
    wasserstein_distance,
)
from .measures import (
    HistogramRelevance,
    NormalRelevance,
    PointMassRelevance,
    UniformRelevance,
    cdf,
    measure_from_dict,
    measure_interval,
    normalize,
    relevance_function,
)
