"""Plane-guided structural defects: hinge bends and stochastic cracks.

Both start from a cutting plane. Bending rotates one half-space about a
PCA-fitted hinge line inside a transition band; cracking removes a
jittered slab of points and marks the surviving rim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DegenerateGeometryError
from ..geometry.analysis import pca_frame
from ..geometry.cloud import Plane, PointCloud
from ..rng import gaussian, make_rng, rotation_about_axis, unit_vector


def signed_distances(cloud: PointCloud, plane: Plane) -> np.ndarray:
    """Per-point signed projection onto the plane normal."""
    return (cloud.points - plane.point) @ plane.normal


@dataclass
class PlaneBand:
    """Points within delta/2 of the plane, with all signed distances kept."""

    plane: Plane
    delta: float
    indices: np.ndarray  # members, ascending
    signed: np.ndarray  # signed distance for every cloud point


def extract_band(cloud: PointCloud, plane: Plane, delta: float) -> PlaneBand:
    if delta <= 0:
        raise ContractError(f"band thickness must be positive, got {delta}")
    s = signed_distances(cloud, plane)
    members = np.flatnonzero(np.abs(s) < delta / 2.0)
    if len(members) == 0:
        raise DegenerateGeometryError("plane misses the cloud: intersection band is empty")
    return PlaneBand(plane=plane, delta=delta, indices=members, signed=s)


@dataclass
class HingeAxis:
    origin: np.ndarray  # band centroid
    direction: np.ndarray  # unit vector


def fit_hinge(band: PlaneBand, cloud: PointCloud) -> HingeAxis:
    """Dominant PCA axis of the band points, anchored at their centroid."""
    if len(band.indices) < 2:
        raise ContractError(f"hinge fit needs >= 2 band points, got {len(band.indices)}")
    pts = cloud.points[band.indices]
    if len(pts) == 2:
        origin = pts.mean(axis=0)
        direction = pts[1] - pts[0]
        nrm = np.linalg.norm(direction)
        if nrm < 1e-12:
            raise DegenerateGeometryError("band points coincide; hinge direction undefined")
        direction = direction / nrm
        j = int(np.argmax(np.abs(direction)))
        if direction[j] < 0:
            direction = -direction
        return HingeAxis(origin=origin, direction=direction)
    mean, axes, _ = pca_frame(pts)
    return HingeAxis(origin=mean, direction=axes[0])


def bend_weights(signed: np.ndarray, delta: float) -> np.ndarray:
    """Angular weight: 0 below the band, ramping linearly to 1 above it."""
    alpha = (signed + delta / 2.0) / delta
    return np.clip(alpha, 0.0, 1.0)


def bend(
    cloud: PointCloud, plane: Plane, delta: float, theta: float
) -> tuple[PointCloud, np.ndarray]:
    """Rotate the positive side about the band's hinge line.

    Points with alpha=0 stay bit-identical; the fully rotated side moves
    rigidly; the band interpolates the angle. Normals rotate along.
    """
    if abs(theta) > np.pi / 2:
        raise ContractError(f"|theta| must be <= pi/2, got {theta}")
    band = extract_band(cloud, plane, delta)
    if theta == 0.0:
        mask = bend_weights(band.signed, delta) > 0
        return cloud.copy(), mask
    hinge = fit_hinge(band, cloud)
    alpha = bend_weights(band.signed, delta)
    mask = alpha > 0

    points = cloud.points.copy()
    normals = None if cloud.normals is None else cloud.normals.copy()
    moving = np.flatnonzero(mask)
    # one rotation matrix per distinct angle; identical alphas share bits
    angles, groups = np.unique(alpha[moving], return_inverse=True)
    for g, a in enumerate(angles):
        rot = rotation_about_axis(hinge.direction, a * theta)
        rows = moving[groups == g]
        points[rows] = (points[rows] - hinge.origin) @ rot.T + hinge.origin
        if normals is not None:
            normals[rows] = normals[rows] @ rot.T
    return PointCloud(points, normals, cloud.id), mask


def crack(
    cloud: PointCloud,
    plane: Plane,
    tau: float,
    sigma: float,
    r_c: float,
    rng_seed: int,
) -> tuple[PointCloud, np.ndarray, np.ndarray]:
    """Remove a jittered slab around the plane and mark the surviving rim.

    Signed distances are perturbed by Gaussian noise of std sigma;
    points with |s~| < tau/2 are deleted, and surviving points with
    tau/2 <= |s~| < tau/2 + r_c form the anomaly mask. Returns
    (cracked cloud, mask over it, removed original indices).
    """
    if tau <= 0:
        raise ContractError(f"crack width must be positive, got {tau}")
    if sigma < 0:
        raise ContractError(f"jitter std must be nonnegative, got {sigma}")
    if r_c <= 0:
        raise ContractError(f"rim thickness must be positive, got {r_c}")
    s = signed_distances(cloud, plane)
    if sigma > 0:
        s = s + gaussian(make_rng(rng_seed), len(s), sigma)
    a = np.abs(s)
    removed = np.flatnonzero(a < tau / 2.0)
    keep = np.flatnonzero(a >= tau / 2.0)
    if len(keep) == 0:
        raise DegenerateGeometryError("crack would remove the entire cloud")
    mask = a[keep] < tau / 2.0 + r_c
    return cloud.select(keep), mask, removed


def sample_plane(
    cloud: PointCloud,
    rng_seed: int,
    delta: float,
    min_side_frac: float = 0.10,
    max_tries: int = 64,
) -> Plane:
    """Draw a cutting plane through the cloud.

    The plane point is a cloud point, the normal uniform on the sphere;
    candidates are rejected until the band is nonempty and both open
    half-spaces outside it hold at least min_side_frac of the points.
    The accepted normal points toward the minority side, so operators
    that act on the positive half-space touch at most half the cloud.
    """
    rng = make_rng(rng_seed)
    n = len(cloud)
    for _ in range(max_tries):
        idx = int(rng.integers(0, n))
        normal = unit_vector(rng)
        plane = Plane(normal=normal, point=cloud.points[idx])
        s = (cloud.points - plane.point) @ plane.normal
        in_band = np.abs(s) < delta / 2.0
        if not in_band.any():
            continue
        lo = np.count_nonzero(s <= -delta / 2.0)
        hi = np.count_nonzero(s >= delta / 2.0)
        if lo >= min_side_frac * n and hi >= min_side_frac * n:
            if hi > lo:
                plane = Plane(normal=-plane.normal, point=plane.point)
            return plane
    raise DegenerateGeometryError(
        f"no admissible cutting plane found in {max_tries} draws"
    )
