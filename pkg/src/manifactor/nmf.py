"""Frobenius NMF with multiplicative updates and NNDSVD initialization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

EPS = 1e-12


@dataclass
class FactorPair:
    """``X ~ F @ G.T`` with ``F`` (m x c) and ``G`` (n x c)."""

    F: np.ndarray
    G: np.ndarray
    loss_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _check_rank(X, c):
    if not 1 <= c <= min(X.shape):
        raise ConfigError(f"rank c={c} must lie in [1, min(m, n)={min(X.shape)}]")


def nndsvd_init(X, c: int, fill_zeros: bool = False) -> FactorPair:
    """Nonnegative double SVD initialization (Boutsidis & Gallopoulos).

    Singular vector signs are fixed by making the largest-magnitude entry of
    each ``u_k`` positive, so the result is deterministic. The leading pair
    uses ``|u_1|, |v_1|``; every other pair keeps whichever of its positive or
    negative sections has the larger norm product. ``fill_zeros`` replaces
    exact zeros by ``mean(X)`` (useful before multiplicative updates, which
    cannot move a zero).
    """
    X = np.asarray(X, dtype=np.float64)
    if np.any(X < 0):
        raise DataError("NNDSVD needs a nonnegative matrix")
    _check_rank(X, c)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    m, n = X.shape
    F = np.zeros((m, c))
    G = np.zeros((n, c))
    for k in range(c):
        u, v = U[:, k], Vt[k]
        if u[np.argmax(np.abs(u))] < 0:
            u, v = -u, -v
        if k == 0:
            F[:, 0] = np.sqrt(s[0]) * np.abs(u)
            G[:, 0] = np.sqrt(s[0]) * np.abs(v)
            continue
        up, un = np.maximum(u, 0), np.maximum(-u, 0)
        vp, vn = np.maximum(v, 0), np.maximum(-v, 0)
        nup, nun = np.linalg.norm(up), np.linalg.norm(un)
        nvp, nvn = np.linalg.norm(vp), np.linalg.norm(vn)
        if nup * nvp >= nun * nvn:
            x, y, nx, ny = up, vp, nup, nvp
        else:
            x, y, nx, ny = un, vn, nun, nvn
        if nx * ny == 0:
            continue
        scale = np.sqrt(s[k] * nx * ny)
        F[:, k] = scale * x / nx
        G[:, k] = scale * y / ny
    if fill_zeros:
        avg = X.mean()
        F[F == 0] = avg
        G[G == 0] = avg
    return FactorPair(F, G)


def frobenius_loss(X, F, G) -> float:
    return float(np.linalg.norm(X - F @ G.T) ** 2)


def nmf_multiplicative(X, c: int, max_iter: int = 1000, tol: float = 1e-6,
                       init: FactorPair | None = None) -> FactorPair:
    """Lee-Seung multiplicative updates for ``min ||X - F G^T||_F^2``, ``F, G >= 0``.

    Starts from NNDSVD (zeros filled with the data mean) unless ``init`` is
    given. Stops when the relative decrease of the loss drops below ``tol``.
    """
    X = np.asarray(X, dtype=np.float64)
    if np.any(X < 0):
        raise DataError("NMF needs a nonnegative matrix")
    _check_rank(X, c)
    fp = init if init is not None else nndsvd_init(X, c, fill_zeros=True)
    F, G = fp.F.copy(), fp.G.copy()
    trace = [frobenius_loss(X, F, G)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        F *= (X @ G) / np.maximum(F @ (G.T @ G), EPS)
        G *= (X.T @ F) / np.maximum(G @ (F.T @ F), EPS)
        trace.append(frobenius_loss(X, F, G))
        prev, cur = trace[-2], trace[-1]
        if prev - cur <= tol * max(prev, EPS):
            converged = True
            break
    return FactorPair(F, G, trace, it, converged)
