import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectforge.errors import ContractError
from defectforge.geometry import PointCloud, build_knn_graph, knn_indices
from oracles import brute_knn


def test_knn_matches_brute_force_random(rng):
    for n, k in [(30, 1), (50, 5), (200, 8), (500, 16)]:
        pts = rng.normal(size=(n, 3))
        assert np.array_equal(knn_indices(pts, k), brute_knn(pts, k))


def test_knn_matches_brute_force_on_tie_heavy_grid():
    # integer grid: exact distance ties everywhere, ordering must fall
    # back to the lower index
    g = np.arange(5)
    pts = np.array([[x, y, z] for x in g for y in g for z in g], dtype=float)
    for k in (1, 4, 6, 12):
        assert np.array_equal(knn_indices(pts, k), brute_knn(pts, k))


def test_knn_duplicate_points():
    pts = np.array([[0, 0, 0], [0, 0, 0], [0, 0, 0], [1, 1, 1]], dtype=float)
    assert np.array_equal(knn_indices(pts, 2), brute_knn(pts, 2))


def test_knn_k_out_of_range(rng):
    pts = rng.normal(size=(10, 3))
    with pytest.raises(ContractError):
        knn_indices(pts, 0)
    with pytest.raises(ContractError):
        knn_indices(pts, 10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60))
def test_knn_property_random_sizes(seed, n):
    r = np.random.default_rng(seed)
    pts = np.round(r.normal(size=(n, 3)) * 2, 1)  # rounding induces ties
    k = int(r.integers(1, n))
    assert np.array_equal(knn_indices(pts, k), brute_knn(pts, k))


def test_graph_symmetric_no_self_loops(rng):
    pts = rng.normal(size=(80, 3))
    g = build_knn_graph(PointCloud(pts), 6)
    edges = g.edge_set()
    assert all((j, i) in edges for i, j in edges)
    assert all(i != j for i, j in edges)


def test_graph_weights_are_pair_distances(rng):
    pts = rng.normal(size=(40, 3))
    g = build_knn_graph(PointCloud(pts), 4)
    for i in range(g.n):
        nbr, w = g.neighbors(i)
        expect = np.linalg.norm(pts[nbr] - pts[i], axis=1)
        assert np.allclose(w, expect, atol=1e-9, rtol=0)


def test_graph_adjacency_matches_brute_force(rng):
    pts = rng.normal(size=(120, 3))
    k = 5
    g = build_knn_graph(PointCloud(pts), k)
    nbr = brute_knn(pts, k)
    expect = set()
    for i in range(len(pts)):
        for j in nbr[i]:
            expect.add((i, int(j)))
            expect.add((int(j), i))
    assert g.edge_set() == expect


def test_graph_collinear_three_points():
    pts = np.array([[0, 0, 0], [1, 0, 0], [3, 0, 0]], dtype=float)
    g = build_knn_graph(PointCloud(pts), 1)
    assert g.edge_set() == {(0, 1), (1, 0), (1, 2), (2, 1)}


def test_graph_k_zero_rejected(rng):
    with pytest.raises(ContractError):
        build_knn_graph(PointCloud(rng.normal(size=(5, 3))), 0)
