"""Correlation-based diversity analysis and training for classifier ensembles."""
from .corr_metrics import (
    CorrelationSummary,
    build_correlation_matrix,
    correlation_summary,
    is_valid_correlation_matrix,
    label_summary,
    pearson,
    summarize,
)
from .theory_bounds import boundary_curve, optimality_gap, rll_bounds, rtl_bound
from .vote_theory import (
    BinaryAccuracyProfile,
    HomogeneousEnsembleSpec,
    accuracy_to_correlation,
    ensemble_majority_accuracy,
    jury_majority_probability,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryAccuracyProfile",
    "CorrelationSummary",
    "HomogeneousEnsembleSpec",
    "accuracy_to_correlation",
    "boundary_curve",
    "build_correlation_matrix",
    "correlation_summary",
    "ensemble_majority_accuracy",
    "is_valid_correlation_matrix",
    "jury_majority_probability",
    "label_summary",
    "optimality_gap",
    "pearson",
    "rll_bounds",
    "rtl_bound",
    "summarize",
]
