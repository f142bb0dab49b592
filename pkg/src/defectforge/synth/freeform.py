"""Free-form surface defects via hull proximity masks and height fields.

Anchors span a convex hull; points near the hull boundary become the
working patch. A Gaussian-mixture height field over the patch's PCA
tangent coordinates displaces points along their normals, followed by
inverse-distance smoothing over the deformed subset.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DegenerateGeometryError
from ..geometry.analysis import estimate_normals, pca_frame
from ..geometry.cloud import PointCloud
from ..geometry.hull import convex_hull, distance_to_hull_surface
from ..geometry.neighbors import knn_indices
from ..geometry.sphere import min_bounding_sphere


@dataclass
class GaussianKernel:
    """One isotropic bump of the height field, in absolute tangent units."""

    amplitude: float
    center: tuple[float, float]
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ContractError(f"kernel sigma must be positive, got {self.sigma}")
        if not np.isfinite(self.amplitude):
            raise ContractError("kernel amplitude must be finite")


@dataclass
class TangentPatch:
    """Hull-mask members with their local PCA frame and (u, v) coordinates."""

    indices: np.ndarray
    center: np.ndarray
    u_axis: np.ndarray
    v_axis: np.ndarray
    coords: np.ndarray  # (|mask|, 2)


def hull_mask(cloud: PointCloud, anchors, eps: float) -> np.ndarray:
    """Indices of points within eps of the anchor hull's boundary."""
    if eps <= 0:
        raise ContractError(f"proximity threshold must be positive, got {eps}")
    anchors = np.asarray(anchors, dtype=np.int64)
    hull = convex_hull(cloud.points[anchors])
    d = distance_to_hull_surface(cloud.points, hull)
    members = np.flatnonzero(d < eps)
    if len(members) == 0:
        raise DegenerateGeometryError(
            "no points near the hull boundary; increase the proximity threshold"
        )
    return members


def build_patch(cloud: PointCloud, members: np.ndarray) -> TangentPatch:
    """Tangent frame and planar coordinates of the masked points."""
    members = np.asarray(members, dtype=np.int64)
    if len(members) < 3:
        raise ContractError(f"patch needs >= 3 members, got {len(members)}")
    pts = cloud.points[members]
    mean, axes, _ = pca_frame(pts)
    rel = pts - mean
    coords = np.column_stack([rel @ axes[0], rel @ axes[1]])
    return TangentPatch(
        indices=members, center=mean, u_axis=axes[0], v_axis=axes[1], coords=coords
    )


def height_field(coords: np.ndarray, kernels: list[GaussianKernel]) -> np.ndarray:
    """Sum of Gaussian bumps evaluated at (u, v) coordinates."""
    if len(kernels) == 0:
        raise ContractError("at least one kernel required")
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    h = np.zeros(len(coords))
    for k in kernels:
        du = coords[:, 0] - k.center[0]
        dv = coords[:, 1] - k.center[1]
        h += k.amplitude * np.exp(-(du**2 + dv**2) / (2.0 * k.sigma**2))
    return h


def deform_freeform(
    cloud: PointCloud, patch: TangentPatch, kernels: list[GaussianKernel]
) -> tuple[PointCloud, np.ndarray]:
    """Displace patch members along their own normals by the height field.

    Returns the deformed cloud and the per-member heights.
    """
    if not cloud.has_normals:
        raise ContractError("freeform deformation requires normals")
    h = height_field(patch.coords, kernels)
    points = cloud.points.copy()
    points[patch.indices] += h[:, None] * cloud.normals[patch.indices]
    return PointCloud(points, cloud.normals.copy(), cloud.id), h


def smooth_local(subset: np.ndarray, k: int, lam: float) -> np.ndarray:
    """Blend each point toward the inverse-distance mean of its k neighbors.

    Weights are d^-1 normalized to sum 1, with distances clamped at
    1e-12. lam=0 returns the input untouched.
    """
    subset = np.asarray(subset, dtype=np.float64)
    if not 0 <= lam <= 1:
        raise ContractError(f"smoothing strength must be in [0, 1], got {lam}")
    if len(subset) < 2:
        warnings.warn("smoothing skipped: subset smaller than 2", RuntimeWarning)
        return subset.copy()
    if not 1 <= k < len(subset):
        raise ContractError(f"k must satisfy 1 <= k < {len(subset)}, got {k}")
    if lam == 0.0:
        return subset.copy()
    nbr = knn_indices(subset, k)
    diff = subset[nbr] - subset[:, None, :]
    d = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2 + diff[..., 2] ** 2)
    inv = 1.0 / np.maximum(d, 1e-12)
    w = inv / inv.sum(axis=1, keepdims=True)
    averaged = np.einsum("nk,nkj->nj", w, subset[nbr])
    return (1.0 - lam) * subset + lam * averaged


def synthesize_freeform(
    cloud: PointCloud,
    anchors,
    eps: float,
    kernels: list[GaussianKernel],
    k_smooth: int = 8,
    lam: float = 0.5,
    h_min: float | None = None,
    rng_seed: int = 0,
) -> tuple[PointCloud, np.ndarray, dict]:
    """Full free-form pipeline: mask, deform, smooth, re-estimate normals.

    The emitted mask keeps only members whose |height| exceeds h_min
    (default 1e-3 of the cloud's bounding-sphere radius); the full
    support is reported in the info dict.
    """
    members = hull_mask(cloud, anchors, eps)
    patch = build_patch(cloud, members)
    return freeform_from_patch(cloud, patch, kernels, k_smooth, lam, h_min)


def freeform_from_patch(
    cloud: PointCloud,
    patch: TangentPatch,
    kernels: list[GaussianKernel],
    k_smooth: int = 8,
    lam: float = 0.5,
    h_min: float | None = None,
) -> tuple[PointCloud, np.ndarray, dict]:
    """Deform + smooth a prebuilt patch; see synthesize_freeform."""
    if h_min is None:
        h_min = 1e-3 * min_bounding_sphere(cloud.points).radius
    deformed, h = deform_freeform(cloud, patch, kernels)
    moved = np.abs(h) > h_min

    points = deformed.points
    members = patch.indices
    if np.any(moved) and len(members) >= 2:
        k_eff = min(k_smooth, len(members) - 1)
        points = points.copy()
        points[members] = smooth_local(points[members], k_eff, lam)

    mask = np.zeros(len(cloud), dtype=bool)
    mask[members[moved]] = True

    normals = deformed.normals
    if np.any(moved):
        k_nrm = min(16, len(cloud) - 1)
        if k_nrm >= 3:
            refreshed = estimate_normals(PointCloud(points, None, cloud.id), k=k_nrm)
            normals = normals.copy()
            normals[mask] = refreshed.normals[mask]

    out = PointCloud(points, normals, cloud.id)
    info = {"support": members, "heights": h, "h_min": float(h_min)}
    return out, mask, info
