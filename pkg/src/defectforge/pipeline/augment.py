"""Pose, noise and dropout augmentations with mask bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..geometry import PointCloud
from ..rng import derive_seed, gaussian, make_rng, random_rotation

MIN_SURVIVORS = 32


@dataclass
class AugmentConfig:
    rotate: bool = True
    noise: bool = True
    noise_std: float = 0.005
    dropout: bool = True
    dropout_max: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if self.noise_std < 0:
            raise ContractError(f"noise std must be >= 0, got {self.noise_std}")
        if not 0 <= self.dropout_max < 1:
            raise ContractError(f"dropout ratio must lie in [0, 1), got {self.dropout_max}")

    def to_dict(self) -> dict:
        return {
            "rotate": self.rotate,
            "noise": self.noise,
            "noise_std": self.noise_std,
            "dropout": self.dropout,
            "dropout_max": self.dropout_max,
            "seed": self.seed,
        }


def augment(
    cloud: PointCloud, mask: np.ndarray, cfg: AugmentConfig
) -> tuple[PointCloud, np.ndarray]:
    """Fixed order: rotate, then jitter, then drop points.

    Each stage draws from its own derived stream so toggling one stage
    never shifts another's randomness.
    """
    mask = np.array(mask, dtype=bool)
    if mask.shape[0] != len(cloud):
        raise ContractError(f"mask rows ({mask.shape[0]}) != points ({len(cloud)})")
    points = cloud.points.copy()
    normals = None if cloud.normals is None else cloud.normals.copy()

    if cfg.rotate:
        rot = random_rotation(make_rng(derive_seed(cfg.seed, "rotate")))
        points = points @ rot.T
        if normals is not None:
            normals = normals @ rot.T

    if cfg.noise and cfg.noise_std > 0:
        rng = make_rng(derive_seed(cfg.seed, "noise"))
        points = points + gaussian(rng, points.shape, cfg.noise_std)

    if cfg.dropout and cfg.dropout_max > 0:
        rng = make_rng(derive_seed(cfg.seed, "dropout"))
        ratio = float(rng.random()) * cfg.dropout_max
        k = int(np.floor(ratio * len(points)))
        if len(points) - k < MIN_SURVIVORS:
            raise ContractError(
                f"dropout of {k} points would leave fewer than {MIN_SURVIVORS}"
            )
        if k > 0:
            drop = rng.choice(len(points), size=k, replace=False)
            keep = np.setdiff1d(np.arange(len(points)), drop, assume_unique=True)
            points = points[keep]
            mask = mask[keep]
            if normals is not None:
                normals = normals[keep]

    return PointCloud(points, normals, cloud.id), mask
