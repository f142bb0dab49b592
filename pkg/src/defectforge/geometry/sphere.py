"""Approximate minimal enclosing sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


@dataclass
class BoundingSphere:
    center: np.ndarray
    radius: float

    def contains(self, points: np.ndarray, slack: float = 1e-9) -> bool:
        d = np.linalg.norm(np.asarray(points, dtype=np.float64) - self.center, axis=1)
        return bool(np.all(d <= self.radius + slack))


def _ritter_center(points: np.ndarray) -> np.ndarray:
    # diameter guess from two farthest-point sweeps
    i1 = int(np.argmax(np.linalg.norm(points - points[0], axis=1)))
    i2 = int(np.argmax(np.linalg.norm(points - points[i1], axis=1)))
    c = (points[i1] + points[i2]) / 2.0
    r = np.linalg.norm(points[i2] - points[i1]) / 2.0
    # second pass: grow toward the farthest outlier until covered
    for _ in range(len(points)):
        d = np.linalg.norm(points - c, axis=1)
        j = int(np.argmax(d))
        if d[j] <= r * (1.0 + 1e-12) + 1e-300:
            break
        r_new = (r + d[j]) / 2.0
        c = c + (d[j] - r_new) / d[j] * (points[j] - c)
        r = r_new
    return c


def _shrink_center(points: np.ndarray, iters: int = 256) -> np.ndarray:
    # farthest-point center walk; after t steps the center is within
    # r_opt/sqrt(t+1) of the optimum, so the radius overshoot is bounded
    c = points.mean(axis=0)
    for t in range(1, iters + 1):
        d2 = np.einsum("ij,ij->i", points - c, points - c)
        f = int(np.argmax(d2))
        c = c + (points[f] - c) / (t + 1.0)
    return c


def min_bounding_sphere(points: np.ndarray) -> BoundingSphere:
    """Enclosing sphere within ~7% of the optimal radius.

    A Ritter construction and a farthest-point center walk both run;
    the tighter center wins. The radius is set to the exact maximum
    distance from the chosen center, so containment always holds.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3 or len(points) == 0:
        raise ContractError("min_bounding_sphere needs a nonempty (N, 3) array")
    if len(points) == 1:
        return BoundingSphere(points[0].copy(), 0.0)
    candidates = [_ritter_center(points), _shrink_center(points)]
    best_c, best_r = None, np.inf
    for c in candidates:
        r = float(np.max(np.linalg.norm(points - c, axis=1)))
        if r < best_r:
            best_c, best_r = c, r
    return BoundingSphere(best_c, best_r)
