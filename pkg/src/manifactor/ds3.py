"""Dissimilarity-based exemplar selection used to initialize the encoding Z.

The initializer solves the strongly convex program

    min_{Z, C}  tr(D^T Z) + delta/2 ||Z||^2 + delta/2 ||C||^2
    s.t.        Z = C,  columns of Z on the simplex,  ||C||_{1,inf} <= tau

with accelerated ADMM (Nesterov momentum on the multiplier).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .proximal import project_l1inf_ball, project_simplex_columns


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class A2dm2State:
    Z: np.ndarray
    C: np.ndarray
    C_hat: np.ndarray
    Lam: np.ndarray
    Lam_hat: np.ndarray
    a_t: float = 1.0
    mu: float = 0.1
    iteration: int = 0
    converged: bool = False
    restarts: int = 0


def ds3_objective(D, Z) -> float:
    """Encoding cost ``tr(D^T Z) = sum_ij D_ij Z_ij``."""
    D, Z = np.asarray(D, dtype=np.float64), np.asarray(Z, dtype=np.float64)
    if D.shape != Z.shape:
        raise ShapeError(f"{D.shape} vs {Z.shape}")
    return float(np.sum(D * Z))


def init_C(D) -> np.ndarray:
    """Single-exemplar encoding: the row of the medoid is all ones."""
    D = np.asarray(D, dtype=np.float64)
    C = np.zeros_like(D)
    C[int(np.argmin(D.sum(axis=1))), :] = 1.0
    return C


def next_momentum(a: float) -> float:
    return (1.0 + math.sqrt(1.0 + 4.0 * a * a)) / 2.0


def a2dm2_init(D, tau: float, delta: float = 0.01, mu: float = 0.1, rho: float = 1.05,
               max_iter: int = 1000, tol: float = 1e-5, chat_step: str = "l1inf",
               return_state: bool = False):
    """Accelerated ADMM initializer for the encoding matrix.

    Each iteration performs

    * Z-step: column-wise simplex projection of ``(mu C_hat - D - Lam_hat) / (mu + delta)``,
    * C-step: l1,inf-ball projection of ``(Lam_hat + mu Z) / (mu + delta)``,
    * ``Lam = Lam_hat + mu (Z - C)`` and the momentum extrapolation of ``Lam``,
    * the look-ahead ``C_hat``: with ``chat_step="simplex"`` the minimizer of
      ``tr(D^T C) + delta/2 ||C||^2 - <Lam_hat, C>`` over simplex columns; with
      ``"l1inf"`` the C-step re-solved with the extrapolated multiplier,
    * ``mu *= rho``.

    Momentum is restarted (``a_t = 1``, no extrapolation) whenever the combined
    primal/dual residual grows. Stops when ``max|Z - C| < tol``; otherwise
    warns with :class:`ConvergenceWarning` and returns the iterate with the
    smallest residual.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if D.ndim != 2 or D.shape[1] != n:
        raise ShapeError("D must be square")
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    if not tau >= 1:
        raise ConfigError(f"tau must be >= 1, got {tau}")
    if chat_step not in ("simplex", "l1inf"):
        raise ConfigError(f"unknown chat_step {chat_step!r}")

    zeros = np.zeros_like(D)
    st = A2dm2State(Z=zeros.copy(), C=zeros.copy(), C_hat=zeros.copy(),
                    Lam=zeros.copy(), Lam_hat=zeros.copy(), mu=mu)
    lam_prev = zeros.copy()
    prev_res = np.inf
    best = (np.inf, None)
    # the simplex look-ahead can blow up; the best finite iterate is kept
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            for it in range(1, max_iter + 1):
                m = st.mu
                st.Z = project_simplex_columns((m * st.C_hat - D - st.Lam_hat) / (m + delta))
                C_new = project_l1inf_ball((st.Lam_hat + m * st.Z) / (m + delta), tau)
                st.Lam = st.Lam_hat + m * (st.Z - C_new)
                gap = float(np.max(np.abs(st.Z - C_new)))
                res = float(np.linalg.norm(st.Z - C_new) ** 2 + np.linalg.norm(C_new - st.C) ** 2)
                st.C = C_new
                st.iteration = it
                if gap < best[0]:
                    best = (gap, st.Z.copy())
                if gap < tol:
                    st.converged = True
                    break
                if res > prev_res:
                    st.a_t = 1.0
                    st.restarts += 1
                    st.Lam_hat = st.Lam.copy()
                else:
                    a_next = next_momentum(st.a_t)
                    st.Lam_hat = st.Lam + ((st.a_t - 1.0) / a_next) * (st.Lam - lam_prev)
                    st.a_t = a_next
                prev_res = res
                lam_prev = st.Lam.copy()
                if chat_step == "simplex":
                    st.C_hat = project_simplex_columns((st.Lam_hat - D) / delta)
                else:
                    st.C_hat = project_l1inf_ball((st.Lam_hat + m * st.Z) / (m + delta), tau)
                st.mu *= rho
        except NumericError:
            pass

    if best[1] is None:
        raise NumericError("A2DM2 produced no finite iterate")
    if not st.converged:
        warnings.warn(f"A2DM2 stopped after {st.iteration} iterations (max|Z-C|={best[0]:.2e})",
                      ConvergenceWarning, stacklevel=2)
        st.Z = best[1]
    return (st.Z, st) if return_state else st.Z
