"""Seeded synthetic clouds for examples, tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .geometry import PointCloud
from .rng import make_rng


def sphere_cloud(
    n: int = 2000,
    seed: int = 0,
    radius: float = 1.0,
    center=(0.0, 0.0, 0.0),
    cloud_id: str | None = None,
) -> PointCloud:
    """Uniform sample of a sphere surface with exact radial normals."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rng = make_rng(seed)
    z = 2.0 * rng.random(n) - 1.0
    phi = 2.0 * np.pi * rng.random(n)
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    dirs = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    points = np.asarray(center, dtype=np.float64) + radius * dirs
    return PointCloud(points, dirs.copy(), id=cloud_id or f"sphere-{seed}")
