import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectforge.errors import ContractError
from defectforge.geometry import PointCloud, min_bounding_sphere, voxel_downsample
from oracles import exact_min_sphere


def test_sphere_single_point():
    s = min_bounding_sphere(np.array([[2.0, 3.0, 4.0]]))
    assert np.allclose(s.center, [2, 3, 4])
    assert s.radius == 0.0


def test_sphere_diameter_case():
    s = min_bounding_sphere(np.array([[0.0, 0, 0], [2.0, 0, 0]]))
    assert np.allclose(s.center, [1, 0, 0], atol=1e-9)
    assert abs(s.radius - 1.0) < 1e-9


def test_sphere_cube_corners():
    corners = np.array(
        [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float
    )
    s = min_bounding_sphere(corners)
    assert s.contains(corners)
    assert s.radius <= 1.1 * np.sqrt(3) / 2


def test_sphere_within_ten_percent_of_optimum(rng):
    for _ in range(25):
        n = int(rng.integers(2, 11))
        pts = rng.normal(size=(n, 3)) * rng.uniform(0.1, 10)
        s = min_bounding_sphere(pts)
        _, r_opt = exact_min_sphere(pts)
        assert s.contains(pts)
        assert s.radius <= 1.1 * r_opt + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 300))
def test_sphere_always_contains(seed, n):
    pts = np.random.default_rng(seed).normal(size=(n, 3)) * 4
    assert min_bounding_sphere(pts).contains(pts)


def test_sphere_empty_rejected():
    with pytest.raises(ContractError):
        min_bounding_sphere(np.zeros((0, 3)))


def test_voxel_single_cell():
    pts = np.array([[0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [0.3, 0.1, 0.2]])
    ds, imap = voxel_downsample(PointCloud(pts), v0=1.0)
    assert len(ds) == 1
    assert np.allclose(ds.points[0], pts.mean(axis=0))
    assert np.array_equal(imap, [0, 0, 0])


def test_voxel_grid_preserves_distinct_cells():
    g = np.arange(4) * 2.0
    pts = np.array([[x, y, z] for x in g for y in g for z in g]) + 0.5
    ds, _ = voxel_downsample(PointCloud(pts), v0=1.0)
    assert len(ds) == len(pts)


def test_voxel_partition_and_centroids(rng):
    pts = rng.normal(size=(400, 3)) * 2
    cloud = PointCloud(pts)
    ds, imap = voxel_downsample(cloud, v0=0.7)
    assert len(imap) == len(pts)
    # brute-force dict grouping
    groups: dict[tuple, list[int]] = {}
    for i, p in enumerate(pts):
        groups.setdefault(tuple(np.floor(p / 0.7).astype(int)), []).append(i)
    assert len(ds) == len(groups)
    for key in groups:
        rows = {int(imap[i]) for i in groups[key]}
        assert len(rows) == 1
        row = rows.pop()
        assert np.allclose(ds.points[row], pts[groups[key]].mean(axis=0), atol=1e-12)


def test_voxel_lexicographic_order(rng):
    pts = rng.normal(size=(100, 3))
    ds, _ = voxel_downsample(PointCloud(pts), v0=0.5)
    ids = np.floor(ds.points / 0.5).astype(int)
    keys = [tuple(r) for r in ids]
    assert keys == sorted(keys)


def test_voxel_normals_are_mean_of_members():
    pts = np.array([[0.1, 0, 0], [0.2, 0, 0]])
    nrm = np.array([[1.0, 0, 0], [0.0, 1.0, 0]])
    ds, _ = voxel_downsample(PointCloud(pts, nrm), v0=1.0)
    assert np.allclose(ds.normals[0], [1 / np.sqrt(2), 1 / np.sqrt(2), 0], atol=1e-12)


def test_voxel_normal_cancellation_fallback():
    pts = np.array([[0.1, 0, 0], [0.2, 0, 0]])
    nrm = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
    ds, _ = voxel_downsample(PointCloud(pts, nrm), v0=1.0)
    assert np.allclose(ds.normals[0], [1, 0, 0])  # lowest-index member


def test_voxel_v0_must_be_positive(rng):
    with pytest.raises(ContractError):
        voxel_downsample(PointCloud(rng.normal(size=(5, 3))), 0.0)
