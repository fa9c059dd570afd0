import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accordant import AccordanceParams, GroupedDataset, InitError, assign_nearest, init_centers, kmeans_fit, recompute_centers
from accordant.kmeans import restart_rngs, squared_distances
from conftest import blobs


def test_init_k_equals_n_selects_every_point():
    d = GroupedDataset(np.arange(6.0), np.zeros(6, dtype=int))
    choice = init_centers(d, 6, "uniform", np.random.default_rng(1))
    assert sorted(choice.center_indices) == list(range(6))


def test_init_is_deterministic_for_a_seed(iris):
    a = init_centers(iris, 3, "uniform", restart_rngs(42, 1)[0]).center_indices
    b = init_centers(iris, 3, "uniform", restart_rngs(42, 1)[0]).center_indices
    assert np.array_equal(a, b) and len(set(a)) == 3


@pytest.mark.parametrize("seed", range(10))
def test_distinct_groups_init_uses_one_point_per_group(iris, seed):
    idx = init_centers(iris, 3, "distinct-groups", np.random.default_rng(seed)).center_indices
    assert sorted(iris.group_of[idx]) == [0, 1, 2]


def test_init_errors():
    d = GroupedDataset(np.arange(4.0), np.array([0, 0, 1, 1]))
    with pytest.raises(InitError):
        init_centers(d, 5, "uniform", np.random.default_rng(0))
    with pytest.raises(InitError):
        init_centers(d, 3, "distinct-groups", np.random.default_rng(0))


def test_assign_nearest_coincident_and_ties():
    d = GroupedDataset(np.array([[5.0, 5.0], [1.0, 0.0]]), np.array([0, 0]))
    centers = np.array([[0.0, 0.0], [2.0, 0.0], [5.0, 5.0]])
    assert list(assign_nearest(d, centers)) == [2, 0]


def test_assign_nearest_figure_geometry():
    # centers 4 apart on the x axis; squared distances x1 -> [2, 15], x2 -> [25, 30]
    c = np.array([[0.0, 0.0], [4.0, 0.0]])
    x1 = [0.375, np.sqrt(2 - 0.375**2)]
    x2 = [1.375, np.sqrt(25 - 1.375**2)]
    d = GroupedDataset(np.array([x1, x2]), np.array([0, 0]))
    np.testing.assert_allclose(squared_distances(d.points, c), [[2, 15], [25, 30]])
    assert list(assign_nearest(d, c)) == [0, 0]


def test_recompute_singleton_and_midpoint():
    d = GroupedDataset(np.array([[1.0, 2.0], [0.0, 0.0], [2.0, 4.0]]), np.zeros(3, dtype=int))
    centers, a = recompute_centers(d, np.array([0, 1, 1]), 2, np.zeros((2, 2)))
    np.testing.assert_array_equal(centers, [[1.0, 2.0], [1.0, 2.0]])
    assert list(a) == [0, 1, 1]


def test_recompute_repairs_empty_clusters_by_hand():
    # points 0, 1, 10 all in cluster 0 (mean 11/3): 10 is farthest and seeds cluster 1;
    # then 0 and 1 tie around mean 0.5 and the lower index seeds cluster 2
    d = GroupedDataset(np.array([0.0, 1.0, 10.0]), np.zeros(3, dtype=int))
    centers, a = recompute_centers(d, np.array([0, 0, 0]), 3, np.array([[0.0], [5.0], [20.0]]))
    assert list(a) == [2, 0, 1]
    np.testing.assert_array_equal(centers.ravel(), [1.0, 10.0, 0.0])


def test_recompute_respects_move_guard():
    d = GroupedDataset(np.array([0.0, 1.0, 10.0]), np.zeros(3, dtype=int))
    centers, a = recompute_centers(d, np.array([0, 0, 0]), 2, np.array([[0.0], [7.0]]), can_move=lambda trial: trial[2] == 0)
    assert list(a) == [1, 0, 0]  # 10 may not move, next farthest (0) does


def test_kmeans_two_pairs_closed_form():
    X = np.array([[0, 0], [0, 2], [10, 0], [10, 2]], dtype=float)
    d = GroupedDataset(X, np.array([0, 0, 1, 1]))
    for seed in range(5):
        c = kmeans_fit(d, AccordanceParams(k=2, seed=seed))
        # each pair: two points at distance 2, squared half-distance 1 each
        assert c.sse == pytest.approx(4.0)
        assert c.assignment[0] == c.assignment[1] != c.assignment[2] == c.assignment[3]


def test_kmeans_k_equals_n_has_zero_sse():
    d = GroupedDataset(np.random.default_rng(0).normal(size=(7, 2)), np.zeros(7, dtype=int))
    c = kmeans_fit(d, AccordanceParams(k=7, init_mode="uniform"))
    assert c.sse == 0.0


def test_kmeans_iris_converges_monotonically(iris):
    for seed in range(5):
        c = kmeans_fit(iris, AccordanceParams(k=3, seed=seed))
        assert c.iterations <= 300 and c.iterations == len(c.sse_trace)
        assert all(b <= a + 1e-9 for a, b in zip(c.sse_trace, c.sse_trace[1:]))
        assert np.bincount(c.assignment, minlength=3).min() > 0


def test_kmeans_is_deterministic(iris):
    p = AccordanceParams(k=3, seed=11, init_mode="uniform")
    a, b = kmeans_fit(iris, p), kmeans_fit(iris, p)
    assert np.array_equal(a.assignment, b.assignment) and a.sse_trace == b.sse_trace


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_assign_nearest_is_sse_optimal_for_fixed_centers(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(8, 2))
    d = GroupedDataset(X, np.zeros(8, dtype=int))
    centers = rng.normal(size=(3, 2))
    best = assign_nearest(d, centers)
    cost = lambda a: ((X - centers[a]) ** 2).sum()
    for _ in range(20):
        other = best.copy()
        i = rng.integers(8)
        other[i] = rng.integers(3)
        assert cost(best) <= cost(other) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_kmeans_trace_monotone_on_random_blobs(seed):
    d = blobs(np.random.default_rng(seed), n_per=10)
    c = kmeans_fit(d, AccordanceParams(k=4, seed=seed, init_mode="uniform"))
    assert all(b <= a + 1e-9 for a, b in zip(c.sse_trace, c.sse_trace[1:]))
