"""Scoring against the bank, aggregation, upsampling and AUROC."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from ..errors import ContractError, UndefinedMetricError
from .bank import PrototypeBank
from .features import FeatureMatrix

_BLOCK_ELEMENTS = 4_000_000


def score_points(features: FeatureMatrix, bank: PrototypeBank) -> np.ndarray:
    """s_i = exact Euclidean distance to the nearest prototype."""
    if features.fingerprint != bank.fingerprint:
        raise ContractError(
            f"extractor fingerprint {features.fingerprint} does not match "
            f"bank fingerprint {bank.fingerprint}"
        )
    rows = features.features
    block = max(1, _BLOCK_ELEMENTS // max(1, len(bank)))
    scores = np.empty(len(rows), dtype=np.float64)
    for start in range(0, len(rows), block):
        stop = min(start + block, len(rows))
        scores[start:stop] = cdist(rows[start:stop], bank.prototypes).min(axis=1)
    return scores


def default_k_agg(n: int) -> int:
    """Top-K size: 1% of points, at least 10, never more than n."""
    return min(n, max(10, int(np.ceil(0.01 * n))))


def aggregate(scores: np.ndarray, k_agg: int) -> float:
    """Mean of the k_agg largest point scores."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= k_agg <= len(scores):
        raise ContractError(
            f"k_agg must satisfy 1 <= k_agg <= {len(scores)}, got {k_agg}"
        )
    if k_agg == len(scores):
        return float(scores.mean())
    top = np.partition(scores, len(scores) - k_agg)[len(scores) - k_agg:]
    return float(top.mean())


def upsample_scores(scores: np.ndarray, index_map: np.ndarray) -> np.ndarray:
    """Original point takes its voxel representative's score."""
    scores = np.asarray(scores, dtype=np.float64)
    index_map = np.asarray(index_map)
    if index_map.ndim != 1:
        raise ContractError("index map must be one-dimensional")
    if len(index_map) and (index_map.min() < 0 or index_map.max() >= len(scores)):
        raise ContractError(
            f"index map references rows outside [0, {len(scores)})"
        )
    return scores[index_map]


def auroc(labels, scores) -> float:
    """Mann-Whitney AUROC with half credit for ties."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise ContractError(f"labels {labels.shape} and scores {scores.shape} differ")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"AUROC needs both classes; got {n_pos} positive and {n_neg} negative"
        )
    ranks = rankdata(scores, method="average")
    pos_rank_sum = ranks[labels].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
