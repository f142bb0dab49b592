"""Nearest-neighbor queries and the symmetrized kNN graph.

Candidate search uses a kd-tree; final ordering is recomputed from
exact squared distances and sorted by (distance, index), so distance
ties always resolve to the lower point index regardless of tree
traversal order. The candidate window grows until the cut boundary is
unambiguous (no point tied with the k-th neighbor can lie outside it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import ContractError


def knn_indices(points: np.ndarray, k: int) -> np.ndarray:
    """(N, k) neighbor indices per point, self excluded, ties by lower index."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= k < n:
        raise ContractError(f"k must satisfy 1 <= k < {n}, got {k}")
    tree = cKDTree(points)
    out = np.empty((n, k), dtype=np.int64)
    window = min(n, k + 9)  # +1 for self, +8 tie slack
    pending = np.arange(n)
    while len(pending):
        _, cand = tree.query(points[pending], k=window)
        # fixed evaluation order (dx^2 + dy^2 + dz^2) so ties are decided
        # on exactly reproducible values
        diffs = points[pending, None, :] - points[cand]
        d2 = diffs[..., 0] ** 2 + diffs[..., 1] ** 2 + diffs[..., 2] ** 2
        not_self = cand != pending[:, None]
        d2 = np.where(not_self, d2, np.inf)  # push self past every real candidate
        order = np.lexsort((cand, d2), axis=1)
        cand_sorted = np.take_along_axis(cand, order, axis=1)
        d2_sorted = np.take_along_axis(d2, order, axis=1)
        if window >= n:
            out[pending] = cand_sorted[:, :k]
            break
        # every excluded point is at least as far (in the tree's metric)
        # as the window's largest real distance; grow while the k-th kept
        # distance comes within rounding of that boundary
        n_real = not_self.sum(axis=1)
        boundary = d2_sorted[np.arange(len(pending)), n_real - 1]
        ambiguous = d2_sorted[:, k - 1] >= boundary * (1.0 - 1e-9)
        settled = pending[~ambiguous]
        out[settled] = cand_sorted[~ambiguous, :k]
        pending = pending[ambiguous]
        window = min(n, window * 2)
    return out


@dataclass
class KnnGraph:
    """Undirected weighted graph in CSR form; weights are pair distances."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def edge_set(self) -> set[tuple[int, int]]:
        pairs = set()
        for i in range(self.n):
            for j in self.neighbors(i)[0]:
                pairs.add((i, int(j)))
        return pairs


def build_knn_graph(cloud, k: int) -> KnnGraph:
    """k nearest neighbors per point, symmetrized by union, no self-loops."""
    points = cloud.points if hasattr(cloud, "points") else np.asarray(cloud, dtype=np.float64)
    n = len(points)
    if not 1 <= k < n:
        raise ContractError(f"k must satisfy 1 <= k < {n}, got {k}")
    nbr = knn_indices(points, k)
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = nbr.reshape(-1)
    # union symmetrization: keep each undirected edge once, emit both arcs
    a = np.minimum(src, dst)
    b = np.maximum(src, dst)
    uniq = np.unique(np.stack([a, b], axis=1), axis=0)
    ii = np.concatenate([uniq[:, 0], uniq[:, 1]])
    jj = np.concatenate([uniq[:, 1], uniq[:, 0]])
    order = np.lexsort((jj, ii))
    ii, jj = ii[order], jj[order]
    w = np.linalg.norm(points[ii] - points[jj], axis=1)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, ii + 1, 1)
    indptr = np.cumsum(indptr)
    return KnnGraph(indptr=indptr, indices=jj, weights=w)
