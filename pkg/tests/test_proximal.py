import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from manifactor.errors import ConfigError, NumericError, ShapeError
from manifactor.proximal import (
    clamp_nonneg,
    l1inf_norm,
    procrustes,
    project_l1inf_ball,
    project_simplex,
    project_simplex_columns,
    prox_l21_columns,
    simplex_report,
)
from oracles import l1inf_by_enumeration, prox_l21_violation, random_orthonormal, simplex_by_enumeration

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


# --- simplex

@pytest.mark.parametrize("v, expected", [
    ([1.0, 0.0], [1.0, 0.0]),
    ([0.8, 0.4], [0.7, 0.3]),
    ([2.0, 0.0], [1.0, 0.0]),
])
def test_simplex_examples(v, expected):
    np.testing.assert_allclose(project_simplex(np.array(v)), expected, atol=1e-12)


def test_simplex_nan_raises():
    with pytest.raises(NumericError):
        project_simplex(np.array([np.nan, 1.0]))


def test_simplex_matches_enumeration(rng):
    for _ in range(200):
        n = rng.integers(1, 7)
        v = rng.normal(scale=rng.choice([0.1, 1.0, 5.0]), size=n)
        np.testing.assert_allclose(project_simplex(v), simplex_by_enumeration(v), atol=1e-10)


def test_simplex_columns_are_independent(rng):
    V = rng.normal(size=(5, 7))
    Z = project_simplex_columns(V)
    for j in range(7):
        np.testing.assert_array_equal(Z[:, j], project_simplex(V[:, j]))


@given(arrays(float, st.integers(1, 12), elements=finite))
def test_simplex_feasible(v):
    z = project_simplex(v)
    assert np.all(z >= 0)
    assert abs(z.sum() - 1.0) < 1e-12 * max(1.0, np.abs(v).sum())


@given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite))
def test_simplex_nonexpansive(a, b):
    assert np.linalg.norm(project_simplex(a) - project_simplex(b)) <= np.linalg.norm(a - b) + 1e-9


def test_simplex_report_kkt(rng):
    rep = simplex_report(rng.normal(size=9))
    assert rep.kkt_residual <= 1e-8
    assert rep.active_set_size == int(np.count_nonzero(rep.output))


# --- l1,inf ball

def test_l1inf_examples():
    np.testing.assert_allclose(project_l1inf_ball(np.eye(2), 1.0), 0.5 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(project_l1inf_ball(np.array([[5.0]]), 1.0), [[1.0]])
    inside = np.array([[0.2, -0.1], [0.0, 0.3]])
    np.testing.assert_array_equal(project_l1inf_ball(inside, 1.0), inside)


def test_l1inf_bad_tau():
    with pytest.raises(ConfigError):
        project_l1inf_ball(np.eye(2), 0.0)


def test_l1inf_matches_enumeration(rng):
    for _ in range(120):
        n, p = rng.integers(1, 4, size=2)
        C = rng.normal(size=(n, p))
        tau = float(rng.uniform(0.05, 1.5) * l1inf_norm(C))
        np.testing.assert_allclose(project_l1inf_ball(C, tau), l1inf_by_enumeration(C, tau), atol=1e-6)


@given(arrays(float, (4, 5), elements=finite), st.floats(0.01, 20))
def test_l1inf_feasible_and_sign_preserving(C, tau):
    P = project_l1inf_ball(C, tau)
    assert l1inf_norm(P) <= tau + 1e-9 * max(1.0, tau)
    assert np.all(P * C >= 0)
    assert np.all(np.abs(P) <= np.abs(C) + 1e-12)


@given(arrays(float, (3, 4), elements=finite), arrays(float, (3, 4), elements=finite), st.floats(0.1, 5))
def test_l1inf_nonexpansive(A, B, tau):
    dp = np.linalg.norm(project_l1inf_ball(A, tau) - project_l1inf_ball(B, tau))
    assert dp <= np.linalg.norm(A - B) + 1e-7


def test_l1inf_info_counts_rows():
    C = np.diag([3.0, 2.0, 0.1])
    P, info = project_l1inf_ball(C, 1.0, return_info=True)
    assert info["active_rows"] == int(np.count_nonzero(np.abs(P).max(axis=1) > 0))
    assert l1inf_norm(P) == pytest.approx(1.0)


# --- prox of the l2,1 norm

def test_prox_examples():
    np.testing.assert_allclose(prox_l21_columns(np.array([[3.0], [4.0]]), 1.0), [[2.4], [3.2]])
    np.testing.assert_array_equal(prox_l21_columns(np.array([[0.3], [0.4]]), 1.0), [[0.0], [0.0]])


def test_prox_optimality(rng):
    for _ in range(100):
        b = rng.normal(size=rng.integers(1, 6))
        t = float(rng.uniform(0.1, 3.0))
        e = prox_l21_columns(b[:, None], t)[:, 0]
        assert prox_l21_violation(b, e, t) < 1e-10


def test_prox_boundary():
    u = np.array([0.6, 0.8])
    for scale, zero in ((1.0 - 1e-3, True), (1.0 + 1e-3, False)):
        e = prox_l21_columns((scale * u)[:, None], 1.0)[:, 0]
        assert (np.linalg.norm(e) == 0) == zero
        assert prox_l21_violation(scale * u, e, 1.0) < 1e-10


def test_prox_rejects_nonpositive_threshold():
    with pytest.raises(ConfigError):
        prox_l21_columns(np.ones((2, 2)), 0.0)


# --- procrustes and clamp

def test_procrustes_examples():
    N = np.vstack([np.eye(2), np.zeros((3, 2))])
    G = procrustes(N)
    np.testing.assert_allclose(G[:2], np.eye(2), atol=1e-12)
    a = np.pi / 6
    R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    np.testing.assert_allclose(procrustes(R), R, atol=1e-12)


def test_procrustes_beats_random(rng):
    N = rng.normal(size=(8, 3))
    G = procrustes(N)
    np.testing.assert_allclose(G.T @ G, np.eye(3), atol=1e-10)
    best = np.trace(G.T @ N)
    for _ in range(300):
        assert np.trace(random_orthonormal(rng, 8, 3).T @ N) <= best + 1e-10


def test_procrustes_errors():
    with pytest.raises(ShapeError):
        procrustes(np.ones((2, 3)))
    with pytest.raises(NumericError):
        procrustes(np.array([[np.inf], [1.0]]))


def test_clamp():
    np.testing.assert_array_equal(clamp_nonneg(-np.eye(2)), np.zeros((2, 2)))
    J = np.array([[1.0, -2.0], [0.0, 3.0]])
    np.testing.assert_array_equal(clamp_nonneg(J), [[1, 0], [0, 3]])
    np.testing.assert_array_equal(clamp_nonneg(clamp_nonneg(J)), clamp_nonneg(J))
