"""Point and curve defects: bumps, dents, scratches, grooves, holes.

A defect is localized by an ordered anchor sequence, thickened into a
skeleton of graph-shortest-path vertices, expanded by a Euclidean
radius, and displaced along the mask's average normal with a linear
falloff in distance to the skeleton.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DegenerateGeometryError, UnreachableAnchorError
from ..geometry.cloud import PointCloud
from ..geometry.neighbors import KnnGraph
from ..rng import make_rng


def select_anchors(
    cloud: PointCloud,
    m: int,
    rng_seed: int,
    region_hint: np.ndarray | None = None,
) -> np.ndarray:
    """m distinct anchor indices, uniform over the hint set (or everything)."""
    n = len(cloud)
    if region_hint is None:
        candidates = np.arange(n, dtype=np.int64)
    else:
        candidates = np.asarray(region_hint, dtype=np.int64)
        if len(candidates) and (candidates.min() < 0 or candidates.max() >= n):
            raise ContractError("region_hint contains out-of-range indices")
    if not 1 <= m <= len(candidates):
        raise ContractError(
            f"m must satisfy 1 <= m <= {len(candidates)} candidates, got {m}"
        )
    rng = make_rng(rng_seed)
    picks = rng.choice(len(candidates), size=m, replace=False)
    return candidates[picks]


def _dijkstra_path(graph: KnnGraph, source: int, target: int) -> tuple[list[int], float]:
    """Shortest path by summed edge weights; returns (vertices, cost)."""
    dist = {source: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, source)]
    visited = set()
    while heap:
        cost, node = heapq.heappop(heap)
        if node in visited:
            continue
        visited.add(node)
        if node == target:
            path = [node]
            while path[-1] != source:
                path.append(prev[path[-1]])
            return path[::-1], cost
        nbr, w = graph.neighbors(node)
        for j, wij in zip(nbr.tolist(), w.tolist()):
            nd = cost + wij
            if j not in dist or nd < dist[j]:
                dist[j] = nd
                prev[j] = node
                heapq.heappush(heap, (nd, j))
    raise UnreachableAnchorError(
        f"anchors {source} and {target} are not connected in the neighbor graph"
    )


@dataclass
class GeodesicSupport:
    """Skeleton vertices (ordered union of sub-paths) plus source anchors."""

    gamma: np.ndarray  # vertex indices, first-occurrence order
    anchors: np.ndarray
    pair_costs: list[float]  # per consecutive anchor pair


def geodesic_support(cloud: PointCloud, graph: KnnGraph, anchors) -> GeodesicSupport:
    """Union of shortest paths between consecutive anchors.

    A single anchor degenerates to a one-vertex skeleton.
    """
    anchors = np.asarray(anchors, dtype=np.int64)
    if len(anchors) == 0:
        raise ContractError("at least one anchor required")
    if anchors.min() < 0 or anchors.max() >= len(cloud):
        raise ContractError("anchor index out of range")
    seen: dict[int, None] = {}
    costs: list[float] = []
    seen[int(anchors[0])] = None
    for a, b in zip(anchors[:-1], anchors[1:]):
        path, cost = _dijkstra_path(graph, int(a), int(b))
        costs.append(cost)
        for v in path:
            seen.setdefault(v, None)
    gamma = np.fromiter(seen.keys(), dtype=np.int64)
    return GeodesicSupport(gamma=gamma, anchors=anchors.copy(), pair_costs=costs)


@dataclass
class RegionField:
    """Mask produced by radius expansion around a skeleton."""

    indices: np.ndarray  # masked point indices, ascending
    distances: np.ndarray  # min distance to the skeleton per masked point
    d_max: float


def expand_region(cloud: PointCloud, support: GeodesicSupport, r: float) -> RegionField:
    """All points strictly within r of the skeleton, with their distances."""
    if r <= 0:
        raise ContractError(f"expansion radius must be positive, got {r}")
    skel = cloud.points[support.gamma]
    # min over skeleton vertices of the pointwise Euclidean distance
    d = np.full(len(cloud), np.inf)
    block = max(1, int(2e7) // max(len(skel), 1))
    for lo in range(0, len(cloud), block):
        chunk = cloud.points[lo : lo + block]
        diff = chunk[:, None, :] - skel[None, :, :]
        d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2 + diff[..., 2] ** 2
        d[lo : lo + block] = np.sqrt(d2.min(axis=1))
    indices = np.flatnonzero(d < r)
    distances = d[indices]
    d_max = float(distances.max()) if len(distances) else 0.0
    return RegionField(indices=indices, distances=distances, d_max=d_max)


def _mean_mask_normal(cloud: PointCloud, indices: np.ndarray) -> np.ndarray:
    if not cloud.has_normals:
        raise ContractError("deformation requires normals")
    mean = cloud.normals[indices].mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm < 1e-9:
        raise DegenerateGeometryError(
            "mask normals cancel out; average direction undefined"
        )
    return mean / norm


def decay_weights(field: RegionField) -> np.ndarray:
    """Linear falloff 1 - d/d_max; a skeleton-only mask weighs 1 everywhere."""
    if field.d_max == 0.0:
        return np.ones(len(field.indices))
    return 1.0 - field.distances / field.d_max


def deform_1d(
    cloud: PointCloud, field: RegionField, dir: int, d: float
) -> tuple[PointCloud, np.ndarray]:
    """Displace masked points along the mask-average normal.

    Magnitude decays linearly from d at the skeleton to 0 at the mask
    boundary. Unmasked rows are bit-identical to the input.
    """
    if dir not in (1, -1):
        raise ContractError(f"dir must be +1 or -1, got {dir}")
    if d <= 0:
        raise ContractError(f"peak magnitude must be positive, got {d}")
    if len(field.indices) == 0:
        raise ContractError("empty region field")
    n_avg = _mean_mask_normal(cloud, field.indices)
    w = decay_weights(field)
    points = cloud.points.copy()
    points[field.indices] += (dir * d * w)[:, None] * n_avg
    mask = np.zeros(len(cloud), dtype=bool)
    mask[field.indices] = True
    normals = None if cloud.normals is None else cloud.normals.copy()
    return PointCloud(points, normals, cloud.id), mask


def punch_hole(
    cloud: PointCloud,
    field: RegionField,
    dir: int,
    d: float,
    removal_frac: float = 0.8,
) -> tuple[PointCloud, np.ndarray, np.ndarray]:
    """Depress the region, then delete points displaced beyond removal_frac*d.

    Returns (cloud without the deleted points, mask over the surviving
    points, removed original indices). The surviving rim of the region
    stays masked.
    """
    if not 0 < removal_frac <= 1:
        raise ContractError(f"removal_frac must be in (0, 1], got {removal_frac}")
    deformed, mask = deform_1d(cloud, field, dir, d)
    w = decay_weights(field)
    removed = field.indices[w > removal_frac]
    keep = np.setdiff1d(np.arange(len(cloud)), removed, assume_unique=True)
    if len(keep) == 0:
        raise DegenerateGeometryError("hole removal would delete the entire cloud")
    return deformed.select(keep), mask[keep], removed
