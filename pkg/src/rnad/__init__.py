"""Density-ratio corrected anomaly detection.

Training data for anomaly detection is contaminated at some unknown rate
while evaluation cares about the balanced inline/anomaly mixture; correcting
that mismatch with the exact density ratio between the two yields, in the
supervised case, a pair of class weights for any base loss and, in the
unsupervised case, the cluster-size-weighted outlier scores of the CBLOF
family. This package implements both routes end to end: dataset handling and
the contamination-controlled split, the weighted loss and a small trainable
detector, seeded k-means scoring variants, ROC-based threshold automation,
and an empirical learnability study on synthetic mixtures.
"""

from . import kernels
from .cluster import ClusterModel, kmeans_fit, partition_large_small, repartition
from .data import (
    ANOMALY,
    INLINE,
    Dataset,
    LoadReport,
    SplitIndices,
    Standardizer,
    apply_standardizer,
    contamination_split,
    fit_standardizer,
    load_csv,
)
from .metrics import EvaluationReport, auroc, optimal_threshold, report, roc_points
from .mixtures import (
    Marginal,
    MixtureSpec,
    bayes_balanced_risk,
    bayes_classifier,
    preset,
    sample_component,
    sample_mixture,
)
from .neural import (
    MlpModel,
    TrainConfig,
    TrainingTrace,
    TrainResult,
    forward,
    gradient_check,
    init_model,
    predict_scores,
    train,
)
from .scores import (
    KdeModel,
    base_score,
    cblof_mod_score,
    cblof_score,
    ecblof_score,
    kde_fit,
    mod_weights,
    score_dataset,
)
from .study import (
    RiskCurve,
    RiskRatioResult,
    empirical_risk_ratio,
    excess_risk_curve,
    importance_weighted_balanced_risk,
    stratified_balanced_risk,
)
from .weights import (
    RNDerivativeSpec,
    RNWeights,
    estimate_contamination,
    rn_derivative,
    rn_weights,
    rn_weights_unnormalized,
    unit_weights,
    weighted_bce,
    weighted_bce_grad,
)

__version__ = "0.1.0"

__all__ = [
    "ANOMALY",
    "INLINE",
    "ClusterModel",
    "Dataset",
    "EvaluationReport",
    "KdeModel",
    "LoadReport",
    "Marginal",
    "MixtureSpec",
    "MlpModel",
    "RNDerivativeSpec",
    "RNWeights",
    "RiskCurve",
    "RiskRatioResult",
    "SplitIndices",
    "Standardizer",
    "TrainConfig",
    "TrainResult",
    "TrainingTrace",
    "apply_standardizer",
    "auroc",
    "base_score",
    "bayes_balanced_risk",
    "bayes_classifier",
    "cblof_mod_score",
    "cblof_score",
    "contamination_split",
    "ecblof_score",
    "empirical_risk_ratio",
    "estimate_contamination",
    "excess_risk_curve",
    "fit_standardizer",
    "forward",
    "gradient_check",
    "importance_weighted_balanced_risk",
    "init_model",
    "kde_fit",
    "kernels",
    "kmeans_fit",
    "load_csv",
    "mod_weights",
    "optimal_threshold",
    "partition_large_small",
    "predict_scores",
    "preset",
    "repartition",
    "report",
    "rn_derivative",
    "rn_weights",
    "rn_weights_unnormalized",
    "roc_points",
    "sample_component",
    "sample_mixture",
    "score_dataset",
    "stratified_balanced_risk",
    "train",
    "unit_weights",
    "weighted_bce",
    "weighted_bce_grad",
]
