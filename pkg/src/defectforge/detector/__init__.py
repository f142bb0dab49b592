"""Stage-III anomaly scoring and evaluation."""

from .bank import (
    DEFAULT_BANK_SIZE,
    PrototypeBank,
    build_prototypes,
    farthest_point_indices,
    load_bank,
    save_bank,
)
from .evaluate import evaluate, score_cloud
from .features import (
    FEATURE_DIM,
    FEATURE_NAMES,
    FeatureMatrix,
    extract_features,
    make_fingerprint,
)
from .metrics import aggregate, auroc, default_k_agg, score_points, upsample_scores

__all__ = [
    "DEFAULT_BANK_SIZE",
    "PrototypeBank",
    "build_prototypes",
    "farthest_point_indices",
    "load_bank",
    "save_bank",
    "evaluate",
    "score_cloud",
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "FeatureMatrix",
    "extract_features",
    "make_fingerprint",
    "aggregate",
    "auroc",
    "default_k_agg",
    "score_points",
    "upsample_scores",
]
