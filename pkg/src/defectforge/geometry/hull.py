"""Convex hulls and exact point-to-surface distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import ContractError, DegenerateGeometryError


@dataclass
class HullMesh:
    """Watertight triangulated convex hull, faces oriented outward."""

    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (T, 3) indices into vertices
    equations: np.ndarray  # (T, 4) outward plane [n | d], n.x + d <= 0 inside

    def contains(self, points: np.ndarray, slack: float = 1e-9) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        side = points @ self.equations[:, :3].T + self.equations[:, 3]
        return np.all(side <= slack, axis=1)


def coplanarity_ratio(points: np.ndarray) -> float:
    """Smallest/largest covariance eigenvalue; ~0 for flat sets."""
    points = np.asarray(points, dtype=np.float64)
    centered = points - points.mean(axis=0)
    w = np.linalg.eigvalsh(centered.T @ centered / len(points))
    if w[2] <= 0:
        return 0.0
    return float(w[0] / w[2])


def convex_hull(anchors: np.ndarray) -> HullMesh:
    """Triangulated convex hull of >= 4 non-coplanar anchor points."""
    anchors = np.asarray(anchors, dtype=np.float64)
    if anchors.ndim != 2 or anchors.shape[1] != 3:
        raise ContractError(f"expected (N, 3) anchors, got {anchors.shape}")
    if len(anchors) < 4:
        raise DegenerateGeometryError(f"convex hull needs >= 4 anchors, got {len(anchors)}")
    if coplanarity_ratio(anchors) <= 1e-10:
        raise DegenerateGeometryError("anchors are coplanar or collinear")
    try:
        hull = ConvexHull(anchors)
    except QhullError as exc:
        raise DegenerateGeometryError(f"hull construction failed: {exc}") from exc

    faces = hull.simplices.copy()
    eqs = hull.equations.copy()
    # qhull's simplex winding is arbitrary; align with the outward normal
    a = anchors[faces[:, 0]]
    b = anchors[faces[:, 1]]
    c = anchors[faces[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), eqs[:, :3]) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return HullMesh(vertices=anchors.copy(), faces=faces, equations=eqs)


def _point_triangle_sqdist(points: np.ndarray, a, b, c) -> np.ndarray:
    """Squared distance from each point to one triangle (closest-point regions)."""
    ab = b - a
    ac = c - a
    ap = points - a
    d1 = ap @ ab
    d2 = ap @ ac
    bp = points - b
    d3 = bp @ ab
    d4 = bp @ ac
    cp = points - c
    d5 = cp @ ab
    d6 = cp @ ac

    closest = np.empty_like(points)
    done = np.zeros(len(points), dtype=bool)

    def settle(cond, value):
        sel = cond & ~done
        closest[sel] = value[sel] if value.ndim == 2 else value
        done[sel] = True

    settle((d1 <= 0) & (d2 <= 0), np.broadcast_to(a, points.shape))
    settle((d3 >= 0) & (d4 <= d3), np.broadcast_to(b, points.shape))

    vc = d1 * d4 - d3 * d2
    denom_ab = d1 - d3
    t_ab = np.divide(d1, denom_ab, out=np.zeros_like(d1), where=denom_ab != 0)
    settle((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + t_ab[:, None] * ab)

    settle((d6 >= 0) & (d5 <= d6), np.broadcast_to(c, points.shape))

    vb = d5 * d2 - d1 * d6
    denom_ac = d2 - d6
    t_ac = np.divide(d2, denom_ac, out=np.zeros_like(d2), where=denom_ac != 0)
    settle((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + t_ac[:, None] * ac)

    va = d3 * d6 - d5 * d4
    e1 = d4 - d3
    e2 = d5 - d6
    denom_bc = e1 + e2
    t_bc = np.divide(e1, denom_bc, out=np.zeros_like(e1), where=denom_bc != 0)
    settle((va <= 0) & (e1 >= 0) & (e2 >= 0), b + t_bc[:, None] * (c - b))

    if not np.all(done):
        rest = ~done
        s = va + vb + vc
        v = vb / s
        w = vc / s
        closest[rest] = a + v[rest, None] * ab + w[rest, None] * ac
    diff = points - closest
    return np.einsum("ij,ij->i", diff, diff)


def distance_to_hull_surface(p: np.ndarray, hull: HullMesh) -> np.ndarray | float:
    """Exact minimum distance to the hull boundary (faces, edges, vertices)."""
    p = np.asarray(p, dtype=np.float64)
    single = p.ndim == 1
    points = np.atleast_2d(p)
    best = np.full(len(points), np.inf)
    for f in hull.faces:
        a, b, c = hull.vertices[f[0]], hull.vertices[f[1]], hull.vertices[f[2]]
        np.minimum(best, _point_triangle_sqdist(points, a, b, c), out=best)
    d = np.sqrt(best)
    return float(d[0]) if single else d
