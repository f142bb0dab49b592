import numpy as np
import pytest

from defectforge.errors import ContractError, DegenerateGeometryError
from defectforge.geometry import PointCloud, convex_hull
from defectforge.synth import (
    GaussianKernel,
    build_patch,
    deform_freeform,
    height_field,
    hull_mask,
    smooth_local,
    synthesize_freeform,
)
from oracles import point_hull_distance
from test_curve import sphere_cloud


def spread_anchors(cloud, count=6, seed=2):
    r = np.random.default_rng(seed)
    return r.choice(len(cloud), size=count, replace=False)


def test_hull_mask_matches_brute_force():
    cloud = sphere_cloud(600)
    anchors = spread_anchors(cloud)
    members = hull_mask(cloud, anchors, eps=0.08)
    hull = convex_hull(cloud.points[anchors])
    want = np.flatnonzero(
        np.array(
            [point_hull_distance(p, hull.vertices, hull.faces) for p in cloud.points]
        )
        < 0.08
    )
    assert np.array_equal(members, want)


def test_hull_mask_contains_anchors():
    cloud = sphere_cloud(400)
    anchors = spread_anchors(cloud, 5, seed=9)
    members = hull_mask(cloud, anchors, eps=1e-6)
    assert np.all(np.isin(anchors, members))


def test_hull_mask_empty_when_eps_below_insphere():
    # all cloud points collapsed at the tetra centroid, far from each face
    tetra = np.array(
        [[1.0, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    )
    centroid = tetra.mean(axis=0, keepdims=True)
    pts = np.concatenate([tetra, np.repeat(centroid, 50, axis=0)])
    cloud = PointCloud(pts)
    insphere = 2.0 / np.sqrt(8.0) / (2.0 * np.sqrt(6.0) / 2.0) / 2.0  # < true radius
    with pytest.raises(DegenerateGeometryError):
        # mask excludes anchors? anchors are at distance 0 -> use a cloud
        # without the anchor rows
        hull_mask(PointCloud(np.repeat(centroid, 50, axis=0)), np.arange(4), eps=insphere)


def test_hull_mask_coplanar_anchor_error():
    cloud = sphere_cloud(100)
    flat = PointCloud(
        np.concatenate([cloud.points, [[0, 0, 5], [1, 0, 5], [0, 1, 5], [1, 1, 5]]])
    )
    with pytest.raises(DegenerateGeometryError):
        hull_mask(flat, [100, 101, 102, 103], eps=0.1)


def test_build_patch_centered_and_isometric_for_plane(rng):
    pts = np.column_stack([rng.uniform(-1, 1, (80, 2)), np.zeros(80)])
    cloud = PointCloud(pts)
    patch = build_patch(cloud, np.arange(80))
    assert np.allclose(patch.coords.mean(axis=0), [0, 0], atol=1e-9)
    d3 = np.linalg.norm(pts[:20, None] - pts[:20], axis=2)
    d2 = np.linalg.norm(patch.coords[:20, None] - patch.coords[:20], axis=2)
    assert np.abs(d3 - d2).max() < 1e-9


def test_height_field_center_and_additivity():
    k1 = GaussianKernel(amplitude=0.37, center=(0.2, -0.4), sigma=0.5)
    k2 = GaussianKernel(amplitude=-0.11, center=(-1.0, 1.0), sigma=0.3)
    at_center = height_field(np.array([[0.2, -0.4]]), [k1])
    assert at_center[0] == 0.37
    pts = np.random.default_rng(0).normal(size=(50, 2))
    both = height_field(pts, [k1, k2])
    split = height_field(pts, [k1]) + height_field(pts, [k2])
    assert np.allclose(both, split, atol=1e-12, rtol=0)


def test_height_field_far_decay():
    k = GaussianKernel(amplitude=2.0, center=(0.0, 0.0), sigma=0.1)
    far = height_field(np.array([[1.0, 0.0]]), [k])  # 10 sigma out
    assert abs(far[0]) < 2.0 * np.exp(-49)


def test_height_field_kernel_validation():
    with pytest.raises(ContractError):
        GaussianKernel(amplitude=1.0, center=(0, 0), sigma=0.0)
    with pytest.raises(ContractError):
        height_field(np.zeros((3, 2)), [])


def test_deform_freeform_along_normals():
    cloud = sphere_cloud(500)
    anchors = spread_anchors(cloud)
    members = hull_mask(cloud, anchors, eps=0.15)
    patch = build_patch(cloud, members)
    kernels = [GaussianKernel(0.05, (0.0, 0.0), 0.4)]
    out, h = deform_freeform(cloud, patch, kernels)
    moved = out.points[members] - cloud.points[members]
    # parallel to the per-point normal, magnitude |h|
    crossed = np.cross(moved, cloud.normals[members])
    assert np.linalg.norm(crossed, axis=1).max() < 1e-9
    assert np.allclose(np.linalg.norm(moved, axis=1), np.abs(h), atol=1e-9)
    untouched = np.setdiff1d(np.arange(len(cloud)), members)
    assert np.array_equal(out.points[untouched], cloud.points[untouched])


def test_smooth_weights_and_identity(rng):
    pts = rng.normal(size=(40, 3))
    assert np.array_equal(smooth_local(pts, k=5, lam=0.0), pts)
    # lam=1 with equidistant neighbors -> arithmetic mean
    square = np.array(
        [[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0], [0, 0, 0]]
    )
    out = smooth_local(square, k=4, lam=1.0)
    assert np.allclose(out[4], square[:4].mean(axis=0), atol=1e-12)


def test_smooth_stays_in_neighbor_hull(rng):
    pts = rng.normal(size=(60, 3))
    out = smooth_local(pts, k=6, lam=0.7)
    from defectforge.geometry import knn_indices

    nbr = knn_indices(pts, 6)
    for i in range(len(pts)):
        group = np.concatenate([[i], nbr[i]])
        try:
            hull = convex_hull(pts[group])
        except DegenerateGeometryError:
            continue
        side = out[i] @ hull.equations[:, :3].T + hull.equations[:, 3]
        assert side.max() <= 1e-9


def test_smooth_contract_errors(rng):
    pts = rng.normal(size=(10, 3))
    with pytest.raises(ContractError):
        smooth_local(pts, k=10, lam=0.5)
    with pytest.raises(ContractError):
        smooth_local(pts, k=3, lam=1.5)
    with pytest.warns(RuntimeWarning):
        out = smooth_local(pts[:1], k=1, lam=0.5)
    assert np.array_equal(out, pts[:1])


def test_synthesize_freeform_zero_amplitude_is_identity():
    cloud = sphere_cloud(300)
    anchors = spread_anchors(cloud, 5, seed=4)
    out, mask, info = synthesize_freeform(
        cloud, anchors, eps=0.1, kernels=[GaussianKernel(0.0, (0, 0), 0.3)]
    )
    assert not mask.any()
    assert np.array_equal(out.points, cloud.points)


def test_synthesize_freeform_positive_kernel_protrusion():
    cloud = sphere_cloud(800)
    anchors = spread_anchors(cloud, 6, seed=12)
    members = hull_mask(cloud, anchors, eps=0.12)
    patch = build_patch(cloud, members)
    target = patch.coords[len(patch.coords) // 3]
    kernels = [GaussianKernel(0.06, (target[0], target[1]), 0.25)]
    out, mask, info = synthesize_freeform(
        cloud, anchors, eps=0.12, kernels=kernels, lam=0.0, h_min=0.01
    )
    assert mask.any()
    # the strongest displacement happens nearest the kernel center
    disp = np.linalg.norm(out.points - cloud.points, axis=1)
    top = np.argmax(disp)
    row = np.flatnonzero(members == top)[0]
    d_uv = np.linalg.norm(patch.coords - target, axis=1)
    assert d_uv[row] == d_uv[np.abs(info["heights"]).argmax()]
    # complement untouched
    outside = np.setdiff1d(np.arange(len(cloud)), members)
    assert np.array_equal(out.points[outside], cloud.points[outside])
    # masked points only where |h| exceeds the floor
    assert np.array_equal(np.flatnonzero(mask), members[np.abs(info["heights"]) > 0.01])


def test_synthesize_freeform_deterministic():
    cloud = sphere_cloud(400)
    anchors = spread_anchors(cloud, 6, seed=3)
    kernels = [GaussianKernel(0.04, (0.1, -0.1), 0.3), GaussianKernel(-0.03, (-0.2, 0.2), 0.2)]
    a = synthesize_freeform(cloud, anchors, 0.1, kernels)
    b = synthesize_freeform(cloud, anchors, 0.1, kernels)
    assert np.array_equal(a[0].points, b[0].points)
    assert np.array_equal(a[1], b[1])


def test_synthesize_freeform_smoothing_only_on_support():
    cloud = sphere_cloud(600)
    anchors = spread_anchors(cloud, 7, seed=8)
    members = hull_mask(cloud, anchors, eps=0.1)
    out, mask, info = synthesize_freeform(
        cloud, anchors, eps=0.1, kernels=[GaussianKernel(0.05, (0, 0), 0.5)], lam=0.5
    )
    outside = np.setdiff1d(np.arange(len(cloud)), members)
    assert np.array_equal(out.points[outside], cloud.points[outside])
