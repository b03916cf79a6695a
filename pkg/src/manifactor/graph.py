"""k-NN structure, heat-kernel affinities, masked learned affinities, Laplacians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, SelectionError, ShapeError
from .kernels import adaptive_bandwidths, gaussian_kernel, pairwise_sq_dist

SUPPORT_TOL = 1e-12


@dataclass
class AffinityGraph:
    """Affinity matrix together with its neighbor lists and Laplacian.

    ``neighbor_lists[i]`` is empty for nodes that own no neighborhood (the
    non-exemplar rows of a masked affinity).
    """

    W: np.ndarray
    neighbor_lists: list[np.ndarray]
    L: np.ndarray
    Deg: np.ndarray
    source: str = "input_heat_kernel"

    @property
    def rows(self) -> np.ndarray:
        return np.array([i for i, nb in enumerate(self.neighbor_lists) if len(nb)], dtype=np.int64)


def _check_square(M, what):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{what} must be square, got {M.shape}")
    return M


def knn_sets(D, k: int) -> np.ndarray:
    """Indices of the ``k`` smallest off-diagonal entries of each row of ``D``.

    Returns an ``n x k`` integer array ordered by increasing dissimilarity;
    ties go to the lower index.
    """
    D = _check_square(D, "dissimilarity")
    n = D.shape[0]
    if not 1 <= k < n:
        raise ConfigError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    off = D.copy()
    np.fill_diagonal(off, np.inf)
    return np.argsort(off, axis=1, kind="stable")[:, :k]


def _top_k_rows(Z, rows, k):
    """Column indices of the k largest off-diagonal entries for each row in ``rows``."""
    sub = Z[rows].copy()
    sub[np.arange(len(rows)), rows] = -np.inf
    return np.argsort(-sub, axis=1, kind="stable")[:, :k]


def laplacian(W):
    """Symmetrized Laplacian ``L = Deg - (W + W^T)/2``.

    Returns ``(L, deg)`` where ``deg`` is the diagonal of ``Deg``.
    """
    W = _check_square(W, "affinity")
    if np.any(W < 0):
        raise DataError("affinity matrix has negative entries")
    S = 0.5 * (W + W.T)
    deg = S.sum(axis=1)
    L = np.diag(deg) - S
    return L, deg


def heat_affinity(X, k: int, mode: str = "distance") -> AffinityGraph:
    """Fixed k-NN graph with adaptive heat-kernel weights.

    ``W_ij = exp(-||x_i - x_j||^2 / (2 sigma_i^2))`` for ``j`` among the k
    nearest neighbors of ``i`` (``sigma_i`` = k-th neighbor distance), else 0.
    """
    D2 = pairwise_sq_dist(X)
    sigma = adaptive_bandwidths(D2, k, mode)
    nbrs = knn_sets(D2, k)
    K = gaussian_kernel(D2, sigma)
    W = np.zeros_like(D2)
    rows = np.arange(D2.shape[0])[:, None]
    W[rows, nbrs] = K[rows, nbrs]
    L, deg = laplacian(W)
    return AffinityGraph(W, list(nbrs), L, deg, "input_heat_kernel")


def select_exemplars(Z, tau: int) -> np.ndarray:
    """Sorted indices of the ``tau`` rows of ``Z`` with the largest L2 norm.

    Ties are broken toward the lower index.
    """
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[0]
    if not 1 <= tau <= n:
        raise ConfigError(f"tau must satisfy 1 <= tau <= n (tau={tau}, n={n})")
    norms = np.linalg.norm(Z, axis=1)
    return np.sort(np.argsort(-norms, kind="stable")[:tau])


def mask_affinity(Z, exemplars, k: int, neighbors=None, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    """Keep, for each exemplar row of ``Z``, only its ``k`` largest off-diagonal entries.

    Non-exemplar rows and the diagonal are zeroed. ``neighbors`` (an ``n x k``
    index array) replaces the top-k selection with fixed neighbor lists, e.g.
    input-space k-NN.

    Entries at or below ``support_tol * max(Z)`` count as structural zeros.
    The splitting iterates approach a sparse Z only asymptotically, leaving
    dust around 1e-60 that a plain top-k would promote to neighbors of rows
    with fewer than ``k`` members.
    """
    Z = _check_square(Z, "encoding")
    R = np.asarray(exemplars, dtype=np.int64).ravel()
    if R.size == 0:
        raise SelectionError("exemplar set is empty")
    n = Z.shape[0]
    if not 1 <= k < n:
        raise ConfigError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    cols = _top_k_rows(Z, R, k) if neighbors is None else np.asarray(neighbors)[R, :k]
    Zhat = np.zeros_like(Z)
    Zhat[R[:, None], cols] = Z[R[:, None], cols]
    np.fill_diagonal(Zhat, 0.0)
    if support_tol > 0:
        Zhat[Zhat <= support_tol * max(float(Z.max()), 0.0)] = 0.0
    return Zhat


def masked_graph(Zhat) -> AffinityGraph:
    """Graph view of a masked affinity; neighbors are the positive entries per row."""
    L, deg = laplacian(Zhat)
    lists = [np.flatnonzero(row > 0) for row in Zhat]
    return AffinityGraph(Zhat, lists, L, deg, "learned_masked")
