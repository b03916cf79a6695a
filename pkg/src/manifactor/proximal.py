"""Closed-form projections and proximal operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError, ShapeError


@dataclass
class ProjectionReport:
    """Diagnostics of a single projection call."""

    input_norm: float
    output: np.ndarray
    active_set_size: int
    kkt_residual: float


def _finite(a, what):
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{what}: non-finite input")
    return a


def project_simplex_columns(V) -> np.ndarray:
    """Project every column of ``V`` onto the probability simplex.

    Sort-and-threshold: with ``u`` the column sorted in decreasing order, the
    threshold is ``(cumsum(u)[r] - 1) / (r + 1)`` for the largest ``r`` with
    ``u[r]`` above it.
    """
    V = _finite(V, "project_simplex")
    n = V.shape[0]
    U = -np.sort(-V, axis=0)
    css = np.cumsum(U, axis=0) - 1.0
    idx = np.arange(1, n + 1, dtype=np.float64)[:, None]
    cond = U - css / idx > 0
    r = n - 1 - np.argmax(cond[::-1], axis=0)
    theta = css[r, np.arange(V.shape[1])] / (r + 1.0)
    return np.maximum(V - theta, 0.0)


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of a vector onto ``{z >= 0, sum(z) = 1}``."""
    v = _finite(v, "project_simplex")
    if v.ndim != 1:
        raise ShapeError("project_simplex expects a vector")
    return project_simplex_columns(v[:, None])[:, 0]


def simplex_report(v) -> ProjectionReport:
    """Project ``v`` and measure the KKT violation of the result."""
    v = _finite(v, "project_simplex")
    z = project_simplex(v)
    active = z > 0
    theta = float(np.mean(v[active] - z[active]))
    # stationarity on the support, dual feasibility off it, primal feasibility
    res = max(
        float(np.max(np.abs(v[active] - z[active] - theta))),
        float(np.max(v[~active] - theta, initial=0.0)),
        abs(float(z.sum()) - 1.0),
    )
    return ProjectionReport(float(np.linalg.norm(v)), z, int(active.sum()), res)


def l1inf_norm(C) -> float:
    """Sum over rows of the row-wise max absolute value."""
    C = np.asarray(C, dtype=np.float64)
    return float(np.abs(C).max(axis=1).sum()) if C.size else 0.0


def _row_thresholds(A_sorted, css, theta):
    """Clip level ``t_i(theta)`` solving ``sum_j (a_ij - t)_+ = theta`` for every row.

    ``A_sorted`` holds absolute row values in decreasing order and ``css`` their
    cumulative sums. Rows whose total mass is at most ``theta`` get ``t = 0``.
    Also returns ``k_i``, the number of entries clipped just right of ``theta``.
    """
    p = A_sorted.shape[1]
    idx = np.arange(1, p + 1, dtype=np.float64)
    T = (css - theta) / idx
    cond = A_sorted >= T
    k = p - np.argmax(cond[:, ::-1], axis=1)
    t = T[np.arange(A_sorted.shape[0]), k - 1]
    zero = css[:, -1] <= theta
    t[zero] = 0.0
    k[zero] = 0
    return t, k


def project_l1inf_ball(C, tau: float, return_info: bool = False):
    """Euclidean projection onto ``{C : sum_i max_j |C_ij| <= tau}``.

    The projection clips row ``i`` to ``[-t_i, t_i]`` where the levels come from
    a single multiplier ``theta``: ``sum_j (|C_ij| - t_i)_+ = theta`` for rows
    with ``t_i > 0`` and ``sum_i t_i = tau``. ``sum_i t_i(theta)`` is convex and
    decreasing, so Newton's method started at ``theta = 0`` increases
    monotonically to the root and stops after finitely many steps.
    """
    C = _finite(C, "project_l1inf_ball")
    if not tau > 0:
        raise ConfigError(f"tau must be > 0, got {tau}")
    if C.ndim != 2:
        raise ShapeError("project_l1inf_ball expects a matrix")
    A = np.abs(C)
    info = {"newton_steps": 0, "active_rows": int(np.count_nonzero(A.max(axis=1) > 0))}
    if A.max(axis=1).sum() <= tau:
        return (C.copy(), info) if return_info else C.copy()

    A_sorted = -np.sort(-A, axis=1)
    css = np.cumsum(A_sorted, axis=1)
    theta = 0.0
    t, k = _row_thresholds(A_sorted, css, theta)
    for step in range(1, 10 * A.shape[0] + 100):
        excess = t.sum() - tau
        active = k > 0
        slope = np.sum(1.0 / k[active])
        if excess <= 1e-15 * max(tau, 1.0) or slope == 0:
            break
        theta_new = theta + excess / slope
        if theta_new <= theta:
            break
        theta = theta_new
        t, k = _row_thresholds(A_sorted, css, theta)
        info["newton_steps"] = step
    # exact level set for the final support
    active = k > 0
    if active.any():
        S = css[np.flatnonzero(active), k[active] - 1]
        theta = (np.sum(S / k[active]) - tau) / np.sum(1.0 / k[active])
        t = np.zeros_like(t)
        t[active] = np.maximum((S - theta) / k[active], 0.0)
    out = np.sign(C) * np.minimum(A, t[:, None])
    info["active_rows"] = int(np.count_nonzero(t > 0))
    info["theta"] = float(theta)
    return (out, info) if return_info else out


def prox_l21_columns(B, threshold: float) -> np.ndarray:
    """Column-wise group shrinkage, the prox of ``threshold * ||.||_{2,1}``.

    ``e_i = (1 - threshold / ||b_i||) b_i`` when ``||b_i|| >= threshold``,
    otherwise zero.
    """
    if not threshold > 0:
        raise ConfigError(f"threshold must be > 0, got {threshold}")
    B = np.asarray(B, dtype=np.float64)
    norms = np.linalg.norm(B, axis=0)
    keep = norms >= threshold
    scale = np.zeros_like(norms)
    scale[keep] = 1.0 - threshold / norms[keep]
    return B * scale


def procrustes(N) -> np.ndarray:
    """Closest matrix with orthonormal columns: ``U V^T`` from the thin SVD of ``N``."""
    N = np.asarray(N, dtype=np.float64)
    if N.ndim != 2 or N.shape[0] < N.shape[1]:
        raise ShapeError(f"procrustes needs a tall matrix, got {N.shape}")
    if not np.all(np.isfinite(N)):
        raise NumericError("procrustes: non-finite input")
    try:
        U, _, Vt = np.linalg.svd(N, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"procrustes: SVD failed ({exc})") from None
    return U @ Vt


def clamp_nonneg(J) -> np.ndarray:
    return np.maximum(np.asarray(J, dtype=np.float64), 0.0)
