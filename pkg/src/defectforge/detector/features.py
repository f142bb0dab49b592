"""Rotation-invariant per-point geometric descriptor.

Stands in for a learned encoder behind the same contract: a fixed-width
FeatureMatrix tagged with an extractor fingerprint so banks and scoring
refuse to mix incompatible feature spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..geometry import PointCloud, estimate_normals
from ..geometry.neighbors import knn_indices

FEATURE_DIM = 11
FEATURE_VERSION = 1
EIGEN_FLOOR = 1e-12

FEATURE_NAMES = (
    "linearity",
    "planarity",
    "sphericity",
    "omnivariance",
    "anisotropy",
    "eigenentropy",
    "surface_variation",
    "mean_neighbor_distance",
    "std_neighbor_distance",
    "normal_deviation",
    "height_range",
)


@dataclass
class FeatureMatrix:
    features: np.ndarray
    fingerprint: dict

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[1] != self.fingerprint.get("dim"):
            raise ContractError(
                f"feature matrix shape {self.features.shape} does not match "
                f"fingerprint dim {self.fingerprint.get('dim')}"
            )
        if not np.isfinite(self.features).all():
            raise ContractError("feature matrix contains non-finite entries")

    def __len__(self) -> int:
        return len(self.features)


def make_fingerprint(k_feat: int) -> dict:
    return {"version": FEATURE_VERSION, "dim": FEATURE_DIM, "k_feat": int(k_feat)}


def extract_features(cloud: PointCloud, k_feat: int = 16) -> FeatureMatrix:
    """Eigen-shape, density and normal statistics over k_feat neighbors.

    Covariance and height statistics include the point itself; distance
    and normal statistics run over the neighbors only. Eigenvalues are
    floored at 1e-12 before any ratio so degenerate neighborhoods stay
    finite.
    """
    n = len(cloud)
    if k_feat < 5:
        raise ContractError(f"k_feat must be >= 5, got {k_feat}")
    if k_feat >= n:
        raise ContractError(f"k_feat = {k_feat} must be < point count {n}")
    if not cloud.has_normals:
        cloud = estimate_normals(cloud, min(16, n - 1))

    points = cloud.points
    normals = cloud.normals
    nbrs = knn_indices(points, k_feat)
    neigh = points[nbrs]                                   # (n, k, 3)
    group = np.concatenate([points[:, None, :], neigh], axis=1)

    centered = group - group.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / group.shape[1]
    lam = np.linalg.eigvalsh(cov)[:, ::-1]                 # descending
    lam = np.maximum(lam, EIGEN_FLOOR)
    lhat = lam / lam.sum(axis=1, keepdims=True)
    l1, l2, l3 = lhat[:, 0], lhat[:, 1], lhat[:, 2]

    linearity = (l1 - l2) / l1
    planarity = (l2 - l3) / l1
    sphericity = l3 / l1
    omnivariance = np.cbrt(l1 * l2 * l3)
    anisotropy = (l1 - l3) / l1
    eigenentropy = -(lhat * np.log(lhat)).sum(axis=1)
    surface_variation = l3

    dist = np.linalg.norm(neigh - points[:, None, :], axis=2)
    mean_distance = dist.mean(axis=1)
    std_distance = dist.std(axis=1)

    dots = np.abs(np.einsum("ni,nki->nk", normals, normals[nbrs]))
    normal_deviation = (1.0 - dots).mean(axis=1)

    heights = np.einsum("nki,ni->nk", group - points[:, None, :], normals)
    height_range = heights.max(axis=1) - heights.min(axis=1)

    features = np.column_stack(
        [
            linearity,
            planarity,
            sphericity,
            omnivariance,
            anisotropy,
            eigenentropy,
            surface_variation,
            mean_distance,
            std_distance,
            normal_deviation,
            height_range,
        ]
    )
    return FeatureMatrix(features, make_fingerprint(k_feat))
