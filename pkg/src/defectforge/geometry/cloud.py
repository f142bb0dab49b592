"""Core value types: point clouds and planes.

Points and normals are float64 numpy arrays of shape (N, 3). Instances
are treated as immutable by convention; operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError


def _as_points(arr) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ContractError(f"expected (N, 3) coordinate array, got shape {out.shape}")
    return out


@dataclass
class PointCloud:
    """A 3D point set with optional unit normals and an opaque id."""

    points: np.ndarray
    normals: np.ndarray | None = None
    id: str = ""

    def __post_init__(self):
        self.points = _as_points(self.points)
        if len(self.points) < 1:
            raise ContractError("point cloud must contain at least one point")
        if self.normals is not None:
            self.normals = _as_points(self.normals)
            if len(self.normals) != len(self.points):
                raise ContractError(
                    f"normals length {len(self.normals)} != point count {len(self.points)}"
                )
            norms = np.linalg.norm(self.normals, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-6):
                raise ContractError("normals must have unit norm within 1e-6")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def copy(self) -> "PointCloud":
        return PointCloud(
            self.points.copy(),
            None if self.normals is None else self.normals.copy(),
            self.id,
        )

    def select(self, indices: np.ndarray, id: str | None = None) -> "PointCloud":
        """New cloud keeping only the given rows (order preserved)."""
        return PointCloud(
            self.points[indices],
            None if self.normals is None else self.normals[indices],
            self.id if id is None else id,
        )

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass
class Plane:
    """Oriented plane given by a unit normal and a point on it."""

    normal: np.ndarray
    point: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=np.float64).reshape(3)
        self.point = np.asarray(self.point, dtype=np.float64).reshape(3)
        n = np.linalg.norm(self.normal)
        if n < 1e-12:
            raise ContractError("plane normal must be nonzero")
        if abs(n - 1.0) > 1e-9:
            self.normal = self.normal / n
