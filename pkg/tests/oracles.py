"""Independent reference implementations used to cross-check the library.

Everything here is written from the underlying definitions (no calls
into defectforge internals) and favors clarity over speed.
"""

from __future__ import annotations

import itertools

import numpy as np


def brute_knn(points: np.ndarray, k: int) -> np.ndarray:
    """All-pairs k nearest neighbors, ties broken by lower index.

    Distances are evaluated as dx^2 + dy^2 + dz^2 in that order, the
    documented formula tie ordering is defined over.
    """
    n = len(points)
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        d = points - points[i]
        d2 = d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2
        order = sorted((float(d2[j]), j) for j in range(n) if j != i)
        out[i] = [j for _, j in order[:k]]
    return out


def floyd_warshall(n: int, edges: dict[tuple[int, int], float]) -> np.ndarray:
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for (i, j), w in edges.items():
        dist[i, j] = min(dist[i, j], w)
        dist[j, i] = min(dist[j, i], w)
    for m in range(n):
        dist = np.minimum(dist, dist[:, m : m + 1] + dist[m : m + 1, :])
    return dist


def _circumsphere_2(a, b):
    c = (a + b) / 2.0
    return c, float(np.linalg.norm(a - c))


def _circumsphere_3(a, b, c):
    # center lies in the triangle plane, equidistant from all three
    u, v = b - a, c - a
    m = np.array([u, v, np.cross(u, v)])
    rhs = np.array([u @ u / 2.0, v @ v / 2.0, 0.0])
    try:
        x = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        return None
    center = a + x @ m  # x expressed in the (u, v, u x v) basis
    return center, float(np.linalg.norm(a - center))


def _circumsphere_4(a, b, c, d):
    m = 2.0 * np.array([b - a, c - a, d - a])
    rhs = np.array(
        [b @ b - a @ a, c @ c - a @ a, d @ d - a @ a]
    )
    try:
        center = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        return None
    return center, float(np.linalg.norm(a - center))


def exact_min_sphere(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact minimal enclosing sphere by support-set enumeration (small N)."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n == 1:
        return pts[0], 0.0
    best = (None, np.inf)
    candidates = []
    for i, j in itertools.combinations(range(n), 2):
        candidates.append(_circumsphere_2(pts[i], pts[j]))
    for i, j, k in itertools.combinations(range(n), 3):
        candidates.append(_circumsphere_3(pts[i], pts[j], pts[k]))
    for i, j, k, l in itertools.combinations(range(n), 4):
        candidates.append(_circumsphere_4(pts[i], pts[j], pts[k], pts[l]))
    for cand in candidates:
        if cand is None:
            continue
        center, radius = cand
        if not np.isfinite(radius):
            continue
        d = np.linalg.norm(pts - center, axis=1)
        if np.all(d <= radius * (1 + 1e-10) + 1e-12) and radius < best[1]:
            best = (center, radius)
    assert best[0] is not None
    return best


def hull_volume(vertices: np.ndarray, faces: np.ndarray) -> float:
    """Signed-tetrahedra volume; positive for outward-oriented faces."""
    total = 0.0
    for f in faces:
        a, b, c = vertices[f[0]], vertices[f[1]], vertices[f[2]]
        total += np.dot(a, np.cross(b, c)) / 6.0
    return float(total)


def _segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def point_triangle_distance(p, a, b, c) -> float:
    """Projection + barycentric inside test, else nearest edge."""
    n = np.cross(b - a, c - a)
    nn = float(n @ n)
    if nn > 0:
        # barycentric coordinates of the in-plane projection
        w_a = float(np.cross(b - p, c - p) @ n) / nn
        w_b = float(np.cross(c - p, a - p) @ n) / nn
        w_c = float(np.cross(a - p, b - p) @ n) / nn
        if w_a >= 0 and w_b >= 0 and w_c >= 0:
            return abs(float((p - a) @ n)) / np.sqrt(nn)
    return min(
        _segment_distance(p, a, b),
        _segment_distance(p, b, c),
        _segment_distance(p, c, a),
    )


def point_hull_distance(p, vertices, faces) -> float:
    return min(
        point_triangle_distance(p, vertices[f[0]], vertices[f[1]], vertices[f[2]])
        for f in faces
    )


def dense_face_samples(vertices, faces, per_face: int, seed: int = 0) -> np.ndarray:
    """Uniform barycentric samples over every face."""
    rng = np.random.default_rng(seed)
    samples = []
    for f in faces:
        a, b, c = vertices[f[0]], vertices[f[1]], vertices[f[2]]
        r1 = np.sqrt(rng.random(per_face))
        r2 = rng.random(per_face)
        pts = (
            (1 - r1)[:, None] * a
            + (r1 * (1 - r2))[:, None] * b
            + (r1 * r2)[:, None] * c
        )
        samples.append(pts)
    return np.concatenate(samples)


def auroc_pair_counting(labels: np.ndarray, scores: np.ndarray) -> float:
    """O(N^2) Mann-Whitney AUROC with half credit for ties."""
    pos = scores[np.asarray(labels).astype(bool)]
    neg = scores[~np.asarray(labels).astype(bool)]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


def brute_fps(rows, k: int) -> list:
    """Greedy farthest-point selection with explicit loops.

    Start at the max-norm row (ties to the lowest index); each step
    adds the row with the largest distance to the selected set, again
    breaking ties toward the lowest index.
    """
    import math

    rows = [list(map(float, r)) for r in rows]
    n = len(rows)

    def dist(a, b):
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))

    best, best_norm = 0, -1.0
    for i, r in enumerate(rows):
        norm = math.sqrt(sum(x * x for x in r))
        if norm > best_norm:
            best, best_norm = i, norm
    selected = [best]
    min_d = [dist(r, rows[best]) for r in rows]
    for _ in range(k - 1):
        nxt, far = 0, -1.0
        for i in range(n):
            if min_d[i] > far:
                nxt, far = i, min_d[i]
        selected.append(nxt)
        for i in range(n):
            d = dist(rows[i], rows[nxt])
            if d < min_d[i]:
                min_d[i] = d
    return selected
