"""Targeted random projection for compressed Bayesian regression.

The pipeline screens predictors by their marginal response correlation,
draws sparse random (or partial-SVD) projections over the selected columns,
fits exact conjugate posteriors in the compressed space, and aggregates
predictions over many projection draws.
"""

__version__ = "0.1.0"

from .data import (
    DataError,
    Dataset,
    StandardizationParams,
    load_csv,
    split,
    standardize,
)
from .ensemble import (
    PLAIN_RP_BASELINE,
    TarpConfig,
    TarpModel,
    TarpPrediction,
    fit_tarp,
    predict_tarp,
    sample_config_grid,
)
from .metrics import (
    ClassificationReport,
    RegressionReport,
    evaluate_classification,
    evaluate_regression,
    frequentist_interval,
)
from .model_io import load_model, save_model
from .posterior import (
    ConvergenceError,
    GaussianPosterior,
    LaplacePosterior,
    PredictiveT,
    central_interval,
    fit_bernoulli_laplace,
    fit_gaussian,
    point_predict,
    predict_prob,
    predictive,
)
from .projection import (
    RIS_PCR,
    RIS_RP,
    ProjectionMatrix,
    compress,
    compute_ris_pcr,
    sample_ris_rp,
    sample_sparse_variant,
)
from .screening import (
    InclusionVector,
    ScreeningProfile,
    default_delta,
    inclusion_probabilities,
    marginal_correlations,
    sample_inclusion,
)
from .simgen import SchemeSpec, generate

__all__ = [
    "__version__",
    "DataError",
    "Dataset",
    "StandardizationParams",
    "load_csv",
    "split",
    "standardize",
    "InclusionVector",
    "ScreeningProfile",
    "default_delta",
    "inclusion_probabilities",
    "marginal_correlations",
    "sample_inclusion",
    "ProjectionMatrix",
    "RIS_RP",
    "RIS_PCR",
    "compress",
    "compute_ris_pcr",
    "sample_ris_rp",
    "sample_sparse_variant",
    "ConvergenceError",
    "GaussianPosterior",
    "LaplacePosterior",
    "PredictiveT",
    "central_interval",
    "fit_bernoulli_laplace",
    "fit_gaussian",
    "point_predict",
    "predict_prob",
    "predictive",
    "PLAIN_RP_BASELINE",
    "TarpConfig",
    "TarpModel",
    "TarpPrediction",
    "fit_tarp",
    "predict_tarp",
    "sample_config_grid",
    "load_model",
    "save_model",
    "ClassificationReport",
    "RegressionReport",
    "evaluate_classification",
    "evaluate_regression",
    "frequentist_interval",
    "SchemeSpec",
    "generate",
]
