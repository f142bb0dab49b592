"""Voxel-grid downsampling with centroid representatives."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from .cloud import PointCloud


def voxel_downsample(cloud: PointCloud, v0: float):
    """One centroid point per occupied voxel.

    Voxel ids are floor(coordinate / v0); output voxels are ordered
    lexicographically by id so results are independent of input order.
    Returns (downsampled cloud, index map original -> kept row). Voxel
    normals are the normalized mean of member normals; a vanishing mean
    falls back to the lowest-index member's normal.
    """
    if v0 <= 0:
        raise ContractError(f"voxel size must be positive, got {v0}")
    pts = cloud.points
    ids = np.floor(pts / v0).astype(np.int64)
    uniq, inverse = np.unique(ids, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)  # numpy >= 2.0 keeps an (N,1) shape here
    m = len(uniq)
    counts = np.bincount(inverse, minlength=m).astype(np.float64)
    centroids = np.zeros((m, 3))
    for a in range(3):
        centroids[:, a] = np.bincount(inverse, weights=pts[:, a], minlength=m) / counts

    normals = None
    if cloud.has_normals:
        sums = np.zeros((m, 3))
        for a in range(3):
            sums[:, a] = np.bincount(inverse, weights=cloud.normals[:, a], minlength=m)
        norms = np.linalg.norm(sums, axis=1)
        bad = norms < 1e-12
        if np.any(bad):
            # lowest-index member per degenerate voxel
            first = np.full(m, len(pts), dtype=np.int64)
            np.minimum.at(first, inverse, np.arange(len(pts)))
            sums[bad] = cloud.normals[first[bad]]
            norms = np.linalg.norm(sums, axis=1)
        normals = sums / norms[:, None]

    ds = PointCloud(centroids, normals, cloud.id)
    return ds, inverse
