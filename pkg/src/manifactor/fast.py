"""Fast encoding update: per-column quadratic programs solved by water-filling.

Each column of the encoding solves

    min_z  d^T z + delta/2 ||z||^2   s.t.  z >= 0,  sum(z) = 1,

whose KKT solution is ``z_i = max((nu - d_i) / delta, 0)`` for a common water
level ``nu``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError


@dataclass
class ColumnQpWorkspace:
    """State of one water-filling run (kept for inspection and tests)."""

    d: np.ndarray
    z: np.ndarray
    s: float
    active_set: list[int] = field(default_factory=list)
    level: float = 0.0
    sentinel: float = 0.0
    steps: int = 0
    mass_trace: list[float] = field(default_factory=list)


def solve_column_qp(d, delta: float, return_workspace: bool = False):
    """Water-filling solution of the single-column QP.

    Costs are extracted in increasing order (repeated argmin, the extracted
    entry replaced by the sentinel ``1 + max(d)``). Every active coordinate
    rises with the water level; a new coordinate joins when the level reached
    with the remaining mass ``s`` would pass its cost. The leftover mass is
    finally spread evenly over the active set.
    """
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    d = np.asarray(d, dtype=np.float64).ravel()
    if not np.all(np.isfinite(d)):
        raise NumericError("solve_column_qp: non-finite costs")
    n = d.size
    work = d.copy()
    sentinel = 1.0 + float(work.max())
    ws = ColumnQpWorkspace(d=d, z=np.zeros(n), s=1.0, sentinel=sentinel)

    i0 = int(np.argmin(work))
    l0 = float(work[i0])
    work[i0] = sentinel
    active = [i0]
    r = l0 + delta * ws.s
    while ws.steps < n - 1:
        i1 = int(np.argmin(work))
        l1 = float(work[i1])
        if r <= l1:
            break
        w = (l1 - l0) / delta
        ws.z[active] += w
        ws.s -= w * len(active)
        ws.mass_trace.append(ws.s)
        work[i1] = sentinel
        l0 = l1
        active.append(i1)
        ws.steps += 1
        r = l0 + delta * ws.s / len(active)
    ws.z[active] += ws.s / len(active)
    ws.active_set = active
    ws.level = r
    return (ws.z, ws) if return_workspace else ws.z


def _water_fill_block(D, delta):
    """Vectorized water-filling over the columns of ``D`` (each column independent)."""
    n = D.shape[0]
    S = np.sort(D, axis=0)
    css = np.cumsum(S, axis=0)
    cnt = np.arange(1, n + 1, dtype=np.float64)[:, None]
    level = (delta + css) / cnt
    # coordinate k (sorted) is active iff its cost lies below the level of the first k+1
    k = n - 1 - np.argmax((S < level)[::-1], axis=0)
    nu = level[k, np.arange(D.shape[1])]
    return np.maximum((nu - D) / delta, 0.0)


def default_workers() -> int:
    env = os.environ.get("MANIFACTOR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def update_Z_fast(D_hat, delta: float, workers: int | None = None, block: int = 256) -> np.ndarray:
    """Solve the column QPs for every column of ``D_hat``.

    Columns are processed in blocks, optionally on a thread pool. Each column's
    arithmetic depends only on that column, so the output is bitwise identical
    for any ``workers``/``block`` choice.
    """
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    D_hat = np.asarray(D_hat, dtype=np.float64)
    if not np.all(np.isfinite(D_hat)):
        raise NumericError("update_Z_fast: non-finite dissimilarities")
    workers = default_workers() if workers is None else max(1, int(workers))
    n_cols = D_hat.shape[1]
    spans = [(a, min(a + block, n_cols)) for a in range(0, n_cols, block)]
    Z = np.empty_like(D_hat)

    def run(span):
        a, b = span
        Z[:, a:b] = _water_fill_block(D_hat[:, a:b], delta)

    if workers == 1 or len(spans) == 1:
        for sp in spans:
            run(sp)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, spans))
    return Z


def solve_fast(X, cfg, **kwargs):
    """Run the fast (Frobenius-relaxed) solver; see :func:`manifactor.solver.solve`."""
    from .solver import solve

    return solve(X, cfg.replace(algorithm="f_smrmf"), **kwargs)
