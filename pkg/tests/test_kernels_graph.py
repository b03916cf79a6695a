import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from manifactor.errors import ConfigError, DataError, SelectionError, ShapeError
from manifactor.graph import heat_affinity, knn_sets, laplacian, mask_affinity, masked_graph, select_exemplars
from manifactor.kernels import (
    adaptive_bandwidths,
    combine_dissimilarity,
    gaussian_kernel,
    input_kernel_dissimilarity,
    kernel_dissimilarity,
    pairwise_sq_dist,
)

LINE = np.array([[0.0, 1.0, 3.0]])


# --- distances and kernels

def test_sq_dist_basis():
    np.testing.assert_array_equal(pairwise_sq_dist(np.eye(2)), [[0, 2], [2, 0]])


def test_sq_dist_loop_oracle(rng):
    A, B = rng.normal(size=(3, 4)), rng.normal(size=(3, 5))
    ref = np.array([[np.sum((A[:, i] - B[:, j]) ** 2) for j in range(5)] for i in range(4)])
    np.testing.assert_allclose(pairwise_sq_dist(A, B), ref, atol=1e-10)
    assert np.all(np.diag(pairwise_sq_dist(A)) == 0)


def test_sq_dist_shape_mismatch():
    with pytest.raises(ShapeError):
        pairwise_sq_dist(np.ones((2, 3)), np.ones((3, 3)))


def test_bandwidths_line():
    np.testing.assert_allclose(adaptive_bandwidths(pairwise_sq_dist(LINE), 1), [1, 1, 2])
    np.testing.assert_allclose(adaptive_bandwidths(pairwise_sq_dist(LINE), 1, "squared_distance"), [1, 1, 4])


def test_bandwidths_duplicates_floored():
    X = np.array([[0.0, 0.0, 5.0]])
    bw = adaptive_bandwidths(pairwise_sq_dist(X), 1)
    assert bw[0] == bw[1] == 1e-12
    K = gaussian_kernel(pairwise_sq_dist(X), bw)
    assert np.all(np.isfinite(K))


def test_bandwidths_sort_oracle(rng):
    X = rng.normal(size=(3, 12))
    D2 = pairwise_sq_dist(X)
    for k in (1, 4, 11):
        ref = [np.sort(np.sqrt(np.delete(D2[i], i)))[k - 1] for i in range(12)]
        np.testing.assert_allclose(adaptive_bandwidths(D2, k), ref)
    with pytest.raises(ConfigError):
        adaptive_bandwidths(D2, 12)


def test_gaussian_kernel_values():
    s = 0.7
    K = gaussian_kernel(np.array([[0.0, 2 * s * s]]), np.array([s]))
    np.testing.assert_allclose(K, [[1.0, np.exp(-1)]])
    with pytest.raises(ConfigError):
        gaussian_kernel(np.zeros((1, 1)), np.array([0.0]))


def test_gaussian_kernel_asymmetric_for_adaptive_bandwidths():
    D2 = pairwise_sq_dist(LINE)
    K = gaussian_kernel(D2, adaptive_bandwidths(D2, 1))
    # point 2 has bandwidth 2, point 1 bandwidth 1: exp(-4/8) vs exp(-4/2)
    assert K[2, 1] == pytest.approx(np.exp(-0.5))
    assert K[1, 2] == pytest.approx(np.exp(-2.0))


@given(arrays(float, (4, 4), elements=st.floats(0, 10)), st.integers(0, 3), st.integers(0, 3), st.floats(0, 5))
def test_kernel_monotone(D2, i, j, bump):
    bw = np.full(4, 0.8)
    K1 = gaussian_kernel(D2, bw)
    D2b = D2.copy()
    D2b[i, j] += bump
    assert gaussian_kernel(D2b, bw)[i, j] <= K1[i, j]


def test_kernel_dissimilarity_examples():
    np.testing.assert_array_equal(kernel_dissimilarity(np.ones((3, 3))), -np.ones((3, 3)))
    out = kernel_dissimilarity(np.array([[1.0, 0.2], [0.6, 1.0]]))
    np.testing.assert_allclose(out, [[-1, -0.4], [-0.4, -1]])


def test_input_kernel_dissimilarity_range(rng):
    D_K, sigma, _ = input_kernel_dissimilarity(rng.uniform(size=(3, 20)), 4)
    assert np.all(D_K <= 0) and np.all(D_K >= -1)
    np.testing.assert_array_equal(np.diag(D_K), -1)
    np.testing.assert_array_equal(D_K, D_K.T)


def test_combine(rng):
    A, B = -rng.uniform(size=(4, 4)), -rng.uniform(size=(4, 4))
    np.testing.assert_array_equal(combine_dissimilarity(A, B, 0.0, 0.3), A)
    np.testing.assert_allclose(combine_dissimilarity(A, B, 0.3, 0.3), A + B)
    ref = np.array([[A[i, j] + 5.0 * B[i, j] for j in range(4)] for i in range(4)])
    np.testing.assert_allclose(combine_dissimilarity(A, B, 0.5, 0.1), ref)
    with pytest.raises(ConfigError):
        combine_dissimilarity(A, B, 0.5, 0.0)


# --- graphs

def test_knn_line():
    np.testing.assert_array_equal(knn_sets(pairwise_sq_dist(LINE), 1), [[1], [0], [1]])
    assert sorted(knn_sets(pairwise_sq_dist(LINE), 2)[0]) == [1, 2]
    with pytest.raises(ConfigError):
        knn_sets(pairwise_sq_dist(LINE), 3)


def test_knn_tie_goes_to_lower_index():
    D = np.array([[0, 5, 1, 3, 3, 1], [5, 0, 1, 1, 1, 1], [1, 1, 0, 1, 1, 1],
                  [3, 1, 1, 0, 1, 1], [3, 1, 1, 1, 0, 1], [1, 1, 1, 1, 1, 0]], dtype=float)
    assert knn_sets(D, 1)[0, 0] == 2


def test_heat_affinity_structure(rng):
    X = rng.uniform(size=(2, 15))
    k = 4
    g = heat_affinity(X, k)
    assert np.all(np.diag(g.W) == 0)
    assert np.all(np.count_nonzero(g.W, axis=1) == k)
    D2 = pairwise_sq_dist(X)
    for i in range(15):
        kth = g.neighbor_lists[i][-1]
        assert g.W[i, kth] == pytest.approx(np.exp(-0.5))
        assert D2[i, kth] == pytest.approx(np.sort(np.delete(D2[i], i))[k - 1])


def test_laplacian_examples():
    L, deg = laplacian(np.zeros((3, 3)))
    assert not L.any()
    L, _ = laplacian(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_array_equal(L, [[1, -1], [-1, 1]])
    with pytest.raises(DataError):
        laplacian(-np.eye(2))


def test_laplacian_quadratic_form(rng):
    for _ in range(10):
        W = rng.uniform(size=(5, 5)) * (rng.uniform(size=(5, 5)) < 0.6)
        L, _ = laplacian(W)
        S = (W + W.T) / 2
        v = rng.normal(size=5)
        ref = 0.5 * sum(S[i, j] * (v[i] - v[j]) ** 2 for i in range(5) for j in range(5))
        assert v @ L @ v == pytest.approx(ref)


@given(arrays(float, (6, 6), elements=st.floats(0, 1)), st.integers(1, 6), st.integers(1, 5))
def test_masked_laplacian_invariants(Z, tau, k):
    R = select_exemplars(Z, tau)
    Zhat = mask_affinity(Z, R, k)
    assert np.count_nonzero(Zhat) <= len(R) * k
    L, _ = laplacian(Zhat)
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-10)
    np.testing.assert_allclose(L, L.T)
    assert np.linalg.eigvalsh(L).min() >= -1e-10


def test_mask_examples():
    Z = np.array([[0.0, 0.7, 0.3], [0.2, 0.1, 0.4], [0.5, 0.5, 0.5]])
    Zhat = mask_affinity(Z, [0], 1)
    assert np.count_nonzero(Zhat) == 1 and Zhat[0, 1] == 0.7
    full = mask_affinity(Z, [0, 1, 2], 2)
    expected = Z.copy()
    np.fill_diagonal(expected, 0)
    np.testing.assert_array_equal(full, expected)
    # all-equal row, k=2: the two lowest-index off-diagonal entries survive
    assert np.flatnonzero(mask_affinity(np.ones((4, 4)), [3], 2)[3]).tolist() == [0, 1]
    with pytest.raises(SelectionError):
        mask_affinity(Z, [], 1)


def test_mask_with_fixed_neighbors():
    Z = np.arange(16, dtype=float).reshape(4, 4)
    nbrs = np.array([[1, 2], [0, 2], [0, 1], [0, 1]])
    Zhat = mask_affinity(Z, [0, 2], 1, nbrs)
    assert np.flatnonzero(Zhat).tolist() == [1, 8]


def test_select_exemplars_examples():
    assert select_exemplars(np.eye(3), 2).tolist() == [0, 1]
    Z = np.diag([3.0, 1.0, 2.0])
    assert select_exemplars(Z, 2).tolist() == [0, 2]
    assert select_exemplars(Z, 3).tolist() == [0, 1, 2]
    assert select_exemplars(5.0 * Z, 2).tolist() == [0, 2]
    with pytest.raises(ConfigError):
        select_exemplars(Z, 0)


def test_masked_graph_lists():
    Zhat = np.array([[0, 0.4, 0], [0, 0, 0], [0.1, 0.2, 0]])
    g = masked_graph(Zhat)
    assert [nb.tolist() for nb in g.neighbor_lists] == [[1], [], [0, 1]]
    assert g.rows.tolist() == [0, 2]
    assert g.source == "learned_masked"


def test_mask_drops_numerical_dust():
    Z = np.array([[0.0, 0.6, 1e-40, 0.4], [0.3, 0.0, 0.3, 0.4], [0.2, 0.2, 0.0, 0.6], [0.5, 0.2, 0.3, 0.0]])
    Zhat = mask_affinity(Z, [0], 3)
    assert np.flatnonzero(Zhat[0]).tolist() == [1, 3]
    assert np.flatnonzero(mask_affinity(Z, [0], 3, support_tol=0.0)[0]).tolist() == [1, 2, 3]
