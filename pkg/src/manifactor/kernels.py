"""Pairwise distances, adaptive Gaussian kernels and kernel dissimilarities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, ShapeError

BANDWIDTH_FLOOR = 1e-12


@dataclass
class DissimilarityBundle:
    """Dissimilarities feeding the encoding update.

    ``D`` lives in input space, ``D_K`` and ``D_K_hg`` are negated averaged
    kernel values in ``[-1, 0]`` and ``D_hat`` is their weighted combination.
    """

    D: np.ndarray
    D_K: np.ndarray
    D_K_hg: np.ndarray
    D_hat: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray


def pairwise_sq_dist(A, B=None) -> np.ndarray:
    """Squared Euclidean distances between the columns of ``A`` and ``B``.

    Entry ``(i, j)`` compares column ``i`` of ``A`` with column ``j`` of ``B``.
    Identical columns give exact zeros.
    """
    A = np.asarray(A, dtype=np.float64)
    B = A if B is None else np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[0] != B.shape[0]:
        raise ShapeError(f"row dimensions differ: {A.shape} vs {B.shape}")
    return cdist(A.T, B.T, "sqeuclidean")


def adaptive_bandwidths(D2, k: int, mode: str = "distance") -> np.ndarray:
    """Per-point bandwidth: distance from point ``i`` to its k-th nearest neighbor.

    The diagonal (self) is excluded. With ``mode="squared_distance"`` the
    squared distance is returned instead. Values are floored at 1e-12 so that
    duplicated points never yield a zero bandwidth.
    """
    D2 = np.asarray(D2, dtype=np.float64)
    n = D2.shape[0]
    if D2.ndim != 2 or D2.shape[1] != n:
        raise ShapeError("expected a square distance matrix")
    if not 1 <= k < n:
        raise ConfigError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    if mode not in ("distance", "squared_distance"):
        raise ConfigError(f"unknown bandwidth mode {mode!r}")
    off = D2.copy()
    np.fill_diagonal(off, np.inf)
    kth = np.partition(off, k - 1, axis=1)[:, k - 1]
    bw = kth if mode == "squared_distance" else np.sqrt(kth)
    return np.maximum(bw, BANDWIDTH_FLOOR)


def gaussian_kernel(D2, bw) -> np.ndarray:
    """Row-adaptive Gaussian kernel ``exp(-D2_ij / (2 bw_i^2))``."""
    D2 = np.asarray(D2, dtype=np.float64)
    bw = np.asarray(bw, dtype=np.float64)
    if bw.shape != (D2.shape[0],):
        raise ShapeError(f"need one bandwidth per row: {bw.shape} vs {D2.shape}")
    if np.any(~(bw > 0)):
        raise ConfigError("bandwidths must be strictly positive")
    return np.exp(-D2 / (2.0 * bw[:, None] ** 2))


def kernel_dissimilarity(K) -> np.ndarray:
    """Symmetrized negated kernel ``-(K + K^T) / 2``."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError("kernel matrix must be square")
    return -0.5 * (K + K.T)


def combine_dissimilarity(D_K, D_K_hg, lam: float, beta: float) -> np.ndarray:
    """``D_K + (lam / beta) * D_K_hg``."""
    if not beta > 0:
        raise ConfigError(f"beta must be > 0 to combine dissimilarities, got {beta}")
    D_K = np.asarray(D_K, dtype=np.float64)
    D_K_hg = np.asarray(D_K_hg, dtype=np.float64)
    if D_K.shape != D_K_hg.shape:
        raise ShapeError(f"{D_K.shape} vs {D_K_hg.shape}")
    return D_K + (lam / beta) * D_K_hg


def input_kernel_dissimilarity(X, k: int, mode: str = "distance"):
    """``(D_K, sigma, D2)`` for the columns of ``X``."""
    D2 = pairwise_sq_dist(X)
    sigma = adaptive_bandwidths(D2, k, mode)
    return kernel_dissimilarity(gaussian_kernel(D2, sigma)), sigma, D2


def latent_kernel_dissimilarity(G, H, k: int, mode: str = "distance", mean_bandwidth: bool = False):
    """``(D_K_hg, gamma)`` between rows ``g_i`` of ``G`` and ``h_j`` of ``H``.

    ``gamma_i`` is the k-th nearest ``h_j`` distance of ``g_i`` (``j != i``);
    with ``mean_bandwidth`` every ``gamma_i`` is replaced by their mean.
    """
    D2 = pairwise_sq_dist(G.T, H.T)
    gamma = adaptive_bandwidths(D2, k, mode)
    if mean_bandwidth:
        gamma = np.full_like(gamma, gamma.mean())
    return kernel_dissimilarity(gaussian_kernel(D2, gamma)), gamma
