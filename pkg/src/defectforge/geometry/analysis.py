"""Normal estimation and local PCA frames."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import ContractError
from .cloud import PointCloud
from .neighbors import knn_indices


def _batched_eigh(cov: np.ndarray):
    """Eigendecomposition of a stack of symmetric 3x3 matrices."""
    w, v = np.linalg.eigh(cov)  # ascending eigenvalues
    return w, v


def estimate_normals(cloud: PointCloud, k: int = 16) -> PointCloud:
    """Per-point normals from neighborhood PCA.

    The normal is the smallest-eigenvalue eigenvector of the covariance
    over the point and its k nearest neighbors, oriented away from the
    cloud centroid; exact orientation ties fall back toward +z. A zero
    covariance (all neighbors coincident) yields +z with a warning.
    """
    n = len(cloud)
    if not 3 <= k < n:
        raise ContractError(f"k must satisfy 3 <= k < {n}, got {k}")
    pts = cloud.points
    nbr = knn_indices(pts, k)
    group = np.concatenate([np.arange(n)[:, None], nbr], axis=1)  # (N, k+1)
    local = pts[group]
    centered = local - local.mean(axis=1, keepdims=True)
    cov = np.einsum("nij,nik->njk", centered, centered) / (k + 1)
    w, v = _batched_eigh(cov)
    normals = v[:, :, 0]  # smallest eigenvalue eigenvector

    degenerate = w[:, 2] < 1e-24
    if np.any(degenerate):
        warnings.warn(
            f"{int(degenerate.sum())} degenerate neighborhoods; normals default to +z",
            RuntimeWarning,
        )
        normals[degenerate] = (0.0, 0.0, 1.0)

    centroid = pts.mean(axis=0)
    dots = np.einsum("ij,ij->i", normals, pts - centroid)
    flip = dots < 0
    tie = dots == 0
    if np.any(tie):
        nz = normals[tie, 2]
        flip_tie = (nz < 0) | ((nz == 0) & (normals[tie, 1] < 0)) | (
            (nz == 0) & (normals[tie, 1] == 0) & (normals[tie, 0] < 0)
        )
        flip = flip.copy()
        flip[np.flatnonzero(tie)[flip_tie]] = True
    normals[flip] = -normals[flip]

    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / np.where(norms == 0, 1.0, norms)
    return PointCloud(pts.copy(), normals, cloud.id)


def pca_frame(points: np.ndarray):
    """(mean, axes, eigenvalues) of a point subset.

    Axes are covariance eigenvectors as rows in descending eigenvalue
    order. Sign convention: an axis is flipped when its largest-magnitude
    component is negative; the frame is then made right-handed by
    flipping the third axis if needed (handedness takes precedence over
    the third axis' sign rule).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ContractError(f"expected (N, 3) array, got {points.shape}")
    if len(points) < 3:
        raise ContractError(f"pca_frame needs >= 3 points, got {len(points)}")
    mean = points.mean(axis=0)
    centered = points - mean
    cov = centered.T @ centered / len(points)
    w, v = np.linalg.eigh(cov)
    order = [2, 1, 0]  # descending
    eigenvalues = w[order]
    axes = v[:, order].T  # rows
    for r in range(3):
        j = int(np.argmax(np.abs(axes[r])))
        if axes[r, j] < 0:
            axes[r] = -axes[r]
    if np.linalg.det(axes) < 0:
        axes[2] = -axes[2]
    return mean, axes, eigenvalues
