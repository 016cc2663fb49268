import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cnak import _rng
from cnak.core import DataError
from cnak.kmeans import KMeansConfig, assign, kmeans, kmeanspp_init, lloyd, within_cluster_ss


def blobs(seed, centers, n=50, std=0.1):
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, float)
    return np.vstack([c + std * rng.standard_normal((n, centers.shape[1])) for c in centers])


def test_kmeanspp_k_equals_n_is_permutation():
    x = np.arange(12, dtype=float).reshape(6, 2)
    c = kmeanspp_init(x, 6, np.random.default_rng(0))
    assert sorted(map(tuple, c)) == sorted(map(tuple, x))


def test_kmeanspp_k1_is_a_data_point():
    x = np.random.default_rng(0).normal(size=(10, 3))
    c = kmeanspp_init(x, 1, np.random.default_rng(1))
    assert any(np.array_equal(c[0], p) for p in x)


def test_kmeanspp_one_seed_per_blob():
    x = blobs(0, [[0, 0], [50, 50]])
    hits = 0
    for t in range(1000):
        c = kmeanspp_init(x, 2, _rng.stream(3, t))
        hits += (c[:, 0] < 25).sum() == 1
    assert hits / 1000 >= 0.99


def test_kmeanspp_errors():
    x = np.array([[0.0], [0.0], [1.0]])
    with pytest.raises(DataError):
        kmeanspp_init(x, 4, np.random.default_rng(0))
    with pytest.raises(DataError):
        kmeanspp_init(x, 3, np.random.default_rng(0))


def test_lloyd_examples():
    x = np.array([[0.0], [1.0], [9.0], [10.0]])
    r = lloyd(x, np.array([[0.0], [10.0]]))
    assert r.centroids.ravel().tolist() == [0.5, 9.5]
    assert r.inertia == 1.0
    b = blobs(1, [[0, 0], [10, 0], [0, 10]], n=30)
    means = b.reshape(3, 30, 2).mean(axis=1)
    r = lloyd(b, means)
    assert r.iterations == 1
    assert r.labels.tolist() == np.repeat([0, 1, 2], 30).tolist()
    r = kmeans(b, KMeansConfig(k=1))
    np.testing.assert_allclose(r.centroids[0], b.mean(axis=0))
    assert r.inertia == pytest.approx(((b - b.mean(axis=0)) ** 2).sum())


def test_assign_examples_and_ties():
    c = np.array([[0.0, 0.0], [2.0, 0.0]])
    assert assign(np.array([[2.0, 0.0]]), c).tolist() == [1]
    assert assign(np.array([[1.0, 0.0]]), c).tolist() == [0]
    rng = np.random.default_rng(5)
    x, cents = rng.normal(size=(20, 3)), rng.normal(size=(4, 3))
    assert assign(x, cents).tolist() == oracles.nearest(x.tolist(), cents.tolist())


def test_within_cluster_ss():
    assert within_cluster_ss(np.array([[0.0], [2.0]]), np.array([[1.0]]), np.array([0, 0])) == 2.0
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert within_cluster_ss(x, x, np.array([0, 1])) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(5, 60), st.integers(1, 6), st.integers(1, 4), st.integers(0, 10**6))
def test_lloyd_inertia_monotone(n, k, d, seed):
    k = min(k, n)
    x = np.random.default_rng(seed).normal(size=(n, d))
    x[: n // 2] += 3.0
    try:
        r = kmeans(x, KMeansConfig(k=k, seed=seed, tol=0.0, max_iter=50))
    except DataError:
        return
    h = r.inertia_history
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(h, h[1:]))
    assert r.labels.tolist() == assign(x, r.centroids).tolist()
    assert r.inertia == pytest.approx(within_cluster_ss(x, r.centroids, r.labels))


def test_empty_cluster_repair_keeps_k():
    x = np.array([[0.0], [0.1], [0.2], [10.0]])
    r = lloyd(x, np.array([[0.0], [100.0], [200.0]]))
    assert r.centroids.shape[0] == 3 and np.unique(r.labels).size == 3
    assert r.diagnostics["empty_repairs"] >= 1


def test_kmeans_deterministic():
    x = np.random.default_rng(0).normal(size=(200, 3))
    a = kmeans(x, KMeansConfig(k=4, seed=9, n_init=3))
    b = kmeans(x, KMeansConfig(k=4, seed=9, n_init=3))
    assert np.array_equal(a.centroids, b.centroids)


def test_nested_inertia_non_increasing_in_k():
    x = blobs(2, [[0, 0], [5, 5], [0, 9]], n=40, std=1.0)
    js = [kmeans(x, KMeansConfig(k=k, seed=0, n_init=5)).inertia for k in range(1, 6)]
    assert all(b <= a for a, b in zip(js, js[1:]))


def test_large_path_matches_direct():
    from cnak.kmeans import squared_distances
    rng = np.random.default_rng(0)
    x, c = rng.normal(size=(3000, 40)), rng.normal(size=(20, 40))
    direct = ((x[:, None, :] - c[None]) ** 2).sum(-1)
    np.testing.assert_allclose(squared_distances(x, c), direct, rtol=1e-9, atol=1e-9)
