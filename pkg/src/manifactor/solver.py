"""Augmented Lagrangian solver for selective manifold regularized factorization.

The problem is

    min  ||X - F G^T||_{2,1} + lam * tr(G^T L_Zhat G) + beta * tr(D^T Z)
    s.t. G^T G = I, G >= 0, columns of Z on the simplex, ||Z||_{1,inf} <= tau

where ``Zhat`` keeps the top-k entries of the ``tau`` strongest rows of ``Z``.
The splitting ``E = X - F G^T``, ``H = G``, ``C = Z`` with multipliers
``Lam1..Lam3`` and a geometrically growing penalty ``mu`` gives closed-form
block updates (see the ``update_*`` functions).

Variants (``SolverConfig.algorithm``):

``smrmf``      learned masked graph, kernel dissimilarities
``smrmf_euc``  same with Euclidean dissimilarities
``smrmf_ns``   no row budget: C is dropped and every row keeps a neighborhood
``f_smrmf``    Frobenius relaxation, Z solved per column by water-filling
``rmnmf``      fixed heat-kernel k-NN graph, no Z at all
``nmf``        plain multiplicative-update NMF
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .ds3 import ConvergenceWarning, a2dm2_init, init_C
from .errors import ConfigError, NumericError, ShapeError
from .fast import update_Z_fast
from .graph import heat_affinity, knn_sets, laplacian, mask_affinity, select_exemplars
from .kernels import (
    adaptive_bandwidths,
    gaussian_kernel,
    input_kernel_dissimilarity,
    kernel_dissimilarity,
    pairwise_sq_dist,
)
from .metrics import cluster_labels
from .nmf import nmf_multiplicative, nndsvd_init
from .proximal import clamp_nonneg, procrustes, project_l1inf_ball, project_simplex_columns, prox_l21_columns

log = logging.getLogger(__name__)

MU_LIMIT = 1e30
FEASIBILITY_TOL = 1e-3


@dataclass
class SolverState:
    X: np.ndarray
    F: np.ndarray
    G: np.ndarray
    E: np.ndarray
    H: np.ndarray
    Z: np.ndarray | None
    C: np.ndarray | None
    Lam1: np.ndarray
    Lam2: np.ndarray
    Lam3: np.ndarray | None
    mu: float
    lam: float = 0.0
    beta: float = 0.0
    rho: float = 1.05
    L: np.ndarray | None = None
    Zhat: np.ndarray | None = None
    exemplars: np.ndarray | None = None
    iteration: int = 0


@dataclass
class SolveResult:
    F: np.ndarray
    G: np.ndarray
    Z: np.ndarray | None
    Zhat: np.ndarray | None
    exemplar_indices: np.ndarray
    objective_trace: list[float]
    residual_trace: list[tuple[float, float, float]]
    iterations: int
    converged: bool
    labels: np.ndarray
    algorithm: str
    wall_time_seconds: float = 0.0
    op_counts: dict = field(default_factory=dict)
    C: np.ndarray | None = None
    H: np.ndarray | None = None
    E: np.ndarray | None = None
    failure: str | None = None

    @property
    def final_residuals(self) -> tuple[float, float, float]:
        return self.residual_trace[-1] if self.residual_trace else (math.nan,) * 3


def _check(arr, step):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values after the {step} update")
    return arr


# ---------------------------------------------------------------- block updates

def update_E(st: SolverState) -> np.ndarray:
    B = st.X - st.F @ st.G.T + st.Lam1 / st.mu
    return _check(prox_l21_columns(B, 1.0 / st.mu), "E")


def update_F(st: SolverState) -> np.ndarray:
    R = st.X - st.E + st.Lam1 / st.mu
    GtG = st.G.T @ st.G
    try:
        F = np.linalg.solve(GtG, (R @ st.G).T).T
    except np.linalg.LinAlgError:
        raise NumericError("singular G^T G in the F update") from None
    return _check(F, "F")


def update_H(st: SolverState) -> np.ndarray:
    J = st.G + st.Lam2 / st.mu
    if st.lam and st.L is not None:
        J = J - (st.lam / st.mu) * (st.L @ st.G)
    return _check(clamp_nonneg(J), "H")


def g_target(st: SolverState) -> np.ndarray:
    """Matrix ``N`` whose orthogonal polar factor is the G update."""
    N = st.H - st.Lam2 / st.mu + (st.X - st.E + st.Lam1 / st.mu).T @ st.F
    if st.lam and st.L is not None:
        N = N - (st.lam / st.mu) * (st.L @ st.H)
    return N


def update_G(st: SolverState) -> np.ndarray:
    N = _check(g_target(st), "G")
    return procrustes(N)


def update_Z(st: SolverState, D_hat=None, weighted=None) -> np.ndarray:
    """Column-wise simplex projection of ``C - Lam3/mu - (beta/mu) D_hat``.

    ``weighted`` may carry ``beta * D_hat`` directly (needed when ``beta = 0``
    while the latent term still contributes).
    """
    W = st.beta * D_hat if weighted is None else weighted
    V = st.C - W / st.mu
    if st.Lam3 is not None:
        V = V - st.Lam3 / st.mu
    return _check(project_simplex_columns(V), "Z")


def update_C(st: SolverState, tau: float, return_info: bool = False):
    V = st.Z + st.Lam3 / st.mu
    C, info = project_l1inf_ball(V, tau, return_info=True)
    _check(C, "C")
    return (C, info) if return_info else C


def update_multipliers(st: SolverState) -> SolverState:
    st.Lam1 = st.Lam1 + st.mu * (st.X - st.F @ st.G.T - st.E)
    st.Lam2 = st.Lam2 + st.mu * (st.G - st.H)
    if st.Lam3 is not None and st.C is not None:
        st.Lam3 = st.Lam3 + st.mu * (st.Z - st.C)
    st.mu *= st.rho
    if not st.mu <= MU_LIMIT:
        raise NumericError(f"penalty mu exceeded {MU_LIMIT:g}; use a smaller rho")
    for name in ("Lam1", "Lam2", "Lam3"):
        v = getattr(st, name)
        if v is not None:
            _check(v, name)
    return st


def residuals(st: SolverState) -> tuple[float, float, float]:
    """``(||X - F G^T - E||_F / ||X||_F, ||G - H||_F, ||Z - C||_F)``."""
    xn = max(float(np.linalg.norm(st.X)), 1e-300)
    r1 = float(np.linalg.norm(st.X - st.F @ st.G.T - st.E)) / xn
    r2 = float(np.linalg.norm(st.G - st.H))
    r3 = float(np.linalg.norm(st.Z - st.C)) if st.Z is not None and st.C is not None else 0.0
    return r1, r2, r3


def objective_value(st: SolverState, D=None) -> float:
    """``||X - F G^T||_{2,1} + lam tr(G^T L G) + beta <D, Z>``.

    The encoding term is skipped when ``D`` or ``Z`` is missing.
    """
    J = float(np.linalg.norm(st.X - st.F @ st.G.T, axis=0).sum())
    if st.lam and st.L is not None:
        J += st.lam * float(np.sum(st.G * (st.L @ st.G)))
    if st.beta and D is not None and st.Z is not None:
        J += st.beta * float(np.sum(D * st.Z))
    return J


# ---------------------------------------------------------------- dissimilarities

def _latent_dissimilarity(G, H, k, mode, mean_bw):
    D2 = pairwise_sq_dist(G.T, H.T)
    gamma = adaptive_bandwidths(D2, k, mode)
    if mean_bw:
        gamma = np.full_like(gamma, gamma.mean())
    return kernel_dissimilarity(gaussian_kernel(D2, gamma))


def weighted_dissimilarity(st, cfg, D_in, k):
    """``beta * D_hat = beta * D_in + lam * D_latent`` for the current G, H."""
    if cfg.algorithm == "smrmf_euc":
        D_lat = np.sqrt(pairwise_sq_dist(st.G.T, st.H.T))
    else:
        D_lat = _latent_dissimilarity(st.G, st.H, k, cfg.bandwidth_mode, cfg.use_gamma_mean())
    return st.beta * D_in + st.lam * D_lat


# ---------------------------------------------------------------- driver

def _op_counts_step(algorithm, n, newton_steps):
    lg = math.log2(max(n, 2))
    if algorithm == "f_smrmf":
        return n * n * lg + n
    z = n * n * lg + n * n
    if algorithm == "smrmf_ns":
        return z
    return z + n * n * lg + (newton_steps + 1) * n * n


def _initial_state(X, cfg):
    fp = nndsvd_init(X, cfg.c)
    m, n = X.shape
    return SolverState(
        X=X, F=fp.F, G=fp.G, E=np.zeros((m, n)), H=fp.G.copy(), Z=None, C=None,
        Lam1=np.zeros((m, n)), Lam2=np.zeros((n, cfg.c)), Lam3=None,
        mu=cfg.mu0, lam=cfg.lam, beta=cfg.beta, rho=cfg.rho,
    )


def solve(X, cfg: SolverConfig | None = None, callback=None) -> SolveResult:
    """Run the configured algorithm on the column-instance matrix ``X``.

    Stops when ``|J_t - J_{t-1}| / max(J_{t-1}, 1e-12) < tol`` and the scaled
    constraint residuals are all below 1e-3, or after ``max_iter`` iterations.
    A non-finite iterate raises :class:`NumericError` naming the step; the
    partial traces are attached to the exception as ``exc.partial``.
    """
    cfg = SolverConfig() if cfg is None else cfg
    cfg.validate()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError("X must be a matrix")
    m, n = X.shape
    if cfg.c > min(m, n):
        raise ConfigError(f"c={cfg.c} exceeds min(m, n)={min(m, n)}")
    if not np.all(np.isfinite(X)):
        raise NumericError("X contains non-finite values")
    t0 = time.perf_counter()
    alg = cfg.algorithm

    if alg == "nmf":
        fp = nmf_multiplicative(X, cfg.c, max_iter=cfg.max_iter, tol=cfg.tol)
        trace = fp.loss_trace[1:]
        return SolveResult(
            F=fp.F, G=fp.G, Z=None, Zhat=None, exemplar_indices=np.arange(0),
            objective_trace=trace, residual_trace=[(0.0, 0.0, 0.0)] * len(trace),
            iterations=fp.iterations, converged=fp.converged, labels=cluster_labels(fp.G),
            algorithm=alg, wall_time_seconds=time.perf_counter() - t0,
        )

    k = cfg.k(n)
    tau = cfg.tau(n)
    st = _initial_state(X, cfg)
    learned = alg != "rmnmf"
    D_euc = np.sqrt(pairwise_sq_dist(X))
    D_in = None
    input_knn = None
    if alg == "rmnmf":
        graph = heat_affinity(X, k, cfg.bandwidth_mode)
        st.L = graph.L
    else:
        if alg == "smrmf_euc":
            D_in = D_euc
        else:
            D_in, _, _ = input_kernel_dissimilarity(X, k, cfg.bandwidth_mode)
        if cfg.mask_source == "input":
            input_knn = knn_sets(D_euc, k)
        if alg == "f_smrmf":
            # relaxed problem: start from its own Z step on the input term
            st.Z = update_Z_fast(D_in, cfg.fast_delta)
            st.C = None
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                st.Z = a2dm2_init(D_euc, tau, delta=cfg.delta, mu=cfg.mu0, rho=cfg.rho,
                                  max_iter=cfg.init_max_iter, tol=cfg.init_tol,
                                  chat_step=cfg.chat_step)
            if alg == "smrmf_ns":
                st.C = st.Z.copy()
            else:
                st.C = init_C(D_euc)
                st.Lam3 = np.zeros((n, n))

    obj, res_trace = [], []
    ops = {"z_step": 0.0}
    converged = False
    frozen = False
    early = n >= cfg.early_term_min_n
    prev_J = None
    step = "init"
    try:
        for it in range(1, cfg.max_iter + 1):
            st.iteration = it
            if learned:
                step = "mask"
                st.exemplars = np.arange(n) if alg == "smrmf_ns" else select_exemplars(st.Z, tau)
                st.Zhat = mask_affinity(st.Z, st.exemplars, k, input_knn)
                st.L, _ = laplacian(st.Zhat)
            step = "E"
            st.E = update_E(st)
            step = "F"
            st.F = update_F(st)
            step = "H"
            st.H = update_H(st)
            step = "G"
            st.G = update_G(st)
            if learned and not frozen:
                step = "Z"
                W = weighted_dissimilarity(st, cfg, D_in, k)
                Z_old = st.Z
                newton = 0
                if alg == "f_smrmf":
                    st.Z = _check(update_Z_fast(W / max(st.beta, 1e-300) if st.beta > 0 else W,
                                                cfg.fast_delta), "Z")
                else:
                    st.Z = update_Z(st, weighted=W)
                    if alg == "smrmf_ns":
                        st.C = st.Z
                    else:
                        step = "C"
                        C_new, info = update_C(st, tau, return_info=True)
                        newton = info["newton_steps"]
                        if early and np.max(np.abs(st.Z - Z_old)) <= cfg.early_term_threshold \
                                and np.max(np.abs(C_new - st.C)) <= cfg.early_term_threshold:
                            frozen = True
                        st.C = C_new
                if early and alg in ("f_smrmf", "smrmf_ns") \
                        and np.max(np.abs(st.Z - Z_old)) <= cfg.early_term_threshold:
                    frozen = True
                ops["z_step"] += _op_counts_step(alg, n, newton)
            step = "multipliers"
            update_multipliers(st)
            J = objective_value(st, D_euc if learned else None)
            if not math.isfinite(J):
                raise NumericError("non-finite objective value")
            obj.append(J)
            res = residuals(st)
            res_trace.append(res)
            if callback is not None:
                callback(st, J, res)
            if prev_J is not None:
                dJ = abs(J - prev_J)
                rel = dJ / max(abs(prev_J), 1e-12)
                if rel < cfg.tol and max(res) < FEASIBILITY_TOL:
                    converged = True
                    break
            prev_J = J
    except NumericError as exc:
        exc.partial = {"objective_trace": obj, "residual_trace": res_trace,
                       "iterations": len(obj), "step": step}
        if f"{step}" not in str(exc):
            exc.args = (f"{exc.args[0]} (step {step}, iteration {st.iteration})",)
        raise

    ex = st.exemplars if st.exemplars is not None else np.arange(0)
    return SolveResult(
        F=st.F, G=st.G, Z=st.Z, Zhat=st.Zhat, exemplar_indices=np.asarray(ex),
        objective_trace=obj, residual_trace=res_trace, iterations=len(obj),
        converged=converged, labels=cluster_labels(st.G), algorithm=alg,
        wall_time_seconds=time.perf_counter() - t0, op_counts=ops, C=st.C, H=st.H, E=st.E,
    )
