"""Spatial-distribution normalization: category profile fit and application.

A profile stores the category's enclosing sphere in model units plus
the shared voxel size in normalized units. Applying it maps every
cloud into (approximately) the unit ball and resamples on a fixed grid,
so downstream features see a scale-free distribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractError, FormatError
from ..geometry import PointCloud, min_bounding_sphere, voxel_downsample

PROFILE_SCHEMA_VERSION = 1


@dataclass
class SdnProfile:
    category: str
    center: np.ndarray
    radius: float
    v0: float

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        if not self.radius > 0:
            raise ContractError(f"profile radius must be positive, got {self.radius}")
        if not 0 < self.v0 < 2:
            raise ContractError(f"voxel size must lie in (0, 2), got {self.v0}")

    def to_dict(self) -> dict:
        return {
            "schema_version": PROFILE_SCHEMA_VERSION,
            "category": self.category,
            "center": [float(c) for c in self.center],
            "radius": float(self.radius),
            "v0": float(self.v0),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SdnProfile":
        version = doc.get("schema_version", PROFILE_SCHEMA_VERSION)
        if version != PROFILE_SCHEMA_VERSION:
            raise FormatError(f"unsupported profile schema_version {version!r}")
        try:
            return cls(
                category=doc["category"],
                center=np.asarray(doc["center"], dtype=np.float64),
                radius=float(doc["radius"]),
                v0=float(doc["v0"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed profile document: {exc}") from exc


def save_profile(profile: SdnProfile, path) -> None:
    Path(path).write_text(
        json.dumps(profile.to_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_profile(path) -> SdnProfile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"profile file is not valid JSON: {exc}") from exc
    return SdnProfile.from_dict(doc)


def fit_sdn_profile(clouds, v0: float = 0.03, category: str = "") -> SdnProfile:
    """Enclosing sphere over the concatenation of all training points."""
    clouds = list(clouds)
    if not clouds:
        raise ContractError("at least one training cloud required")
    sphere = min_bounding_sphere(np.vstack([c.points for c in clouds]))
    return SdnProfile(category=category, center=sphere.center, radius=sphere.radius, v0=v0)


def normalize(cloud: PointCloud, profile: SdnProfile) -> PointCloud:
    """x -> (x - o_c) / r_c; normals are direction-invariant under this map."""
    points = (cloud.points - profile.center) / profile.radius
    normals = None if cloud.normals is None else cloud.normals.copy()
    return PointCloud(points, normals, cloud.id)


def denormalize(points: np.ndarray, profile: SdnProfile) -> np.ndarray:
    return np.asarray(points, dtype=np.float64) * profile.radius + profile.center


def apply_sdn(cloud: PointCloud, profile: SdnProfile) -> tuple[PointCloud, np.ndarray]:
    """Normalize then voxel-resample.

    Returns the downsampled cloud and the map from input rows to output
    rows (normalization is row-preserving, so the voxel inverse map is
    the whole composition).
    """
    return voxel_downsample(normalize(cloud, profile), profile.v0)


def pool_mask(mask: np.ndarray, inverse: np.ndarray, n_out: int) -> np.ndarray:
    """Voxel label pooling: a cell is anomalous iff any member is."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape[0] != inverse.shape[0]:
        raise ContractError(
            f"mask rows ({mask.shape[0]}) and inverse map rows ({inverse.shape[0]}) differ"
        )
    pooled = np.zeros(n_out, dtype=bool)
    np.logical_or.at(pooled, inverse, mask)
    return pooled
