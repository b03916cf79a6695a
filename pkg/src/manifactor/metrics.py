"""Clustering metrics and neighborhood diagnostics of affinity graphs."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError, ShapeError

NMI_NORMALIZATION = "geometric"
SIMILARITY_AVERAGING = "per_pair"


@dataclass
class DiagnosticsReport:
    """Cluster-assumption violation statistics of a k-NN style graph.

    Similarities are ``None`` when the corresponding class of neighborhoods
    (good or bad) is empty.
    """

    pct_bad_nn: float
    pct_bad_nbh: float
    sim_good_nbh: float | None
    sim_bad_nbh: float | None
    k_used: int
    graph_source: str
    n_neighborhoods: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["similarity_averaging"] = SIMILARITY_AVERAGING
        return d


def cluster_labels(G) -> np.ndarray:
    """Row-wise argmax of the indicator matrix; ties go to the lowest column."""
    return np.argmax(np.asarray(G), axis=1).astype(np.int64)


def _codes(a):
    return np.unique(np.asarray(a).ravel(), return_inverse=True)[1]


def _contingency(pred, truth):
    pred, truth = np.asarray(pred).ravel(), np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ShapeError(f"label vectors differ in length: {pred.size} vs {truth.size}")
    if pred.size == 0:
        raise ShapeError("empty label vectors")
    p, t = _codes(pred), _codes(truth)
    M = np.zeros((p.max() + 1, t.max() + 1))
    np.add.at(M, (p, t), 1)
    return M


def accuracy(pred, truth) -> float:
    """Fraction matched under the best one-to-one cluster/class assignment."""
    M = _contingency(pred, truth)
    r, c = linear_sum_assignment(M, maximize=True)
    return float(M[r, c].sum() / M.sum())


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of the entropies."""
    M = _contingency(pred, truth)
    nz_rows, nz_cols = np.count_nonzero(M, axis=1), np.count_nonzero(M, axis=0)
    if M.shape[0] == M.shape[1] and np.all(nz_rows == 1) and np.all(nz_cols == 1):
        return 1.0  # same partition up to relabeling; skip the rounding in log ratios
    n = M.sum()
    P = M / n
    pp, pt = P.sum(axis=1), P.sum(axis=0)
    hp = -np.sum(pp * np.log(pp))
    ht = -np.sum(pt * np.log(pt))
    if hp == 0 or ht == 0:
        return 1.0 if hp == ht else 0.0
    nz = P > 0
    mi = np.sum(P[nz] * np.log(P[nz] / np.outer(pp, pt)[nz]))
    return float(min(max(mi / np.sqrt(hp * ht), 0.0), 1.0))


def neighborhood_diagnostics(graph, labels, k: int | None = None, similarity=None) -> DiagnosticsReport:
    """Label-mismatch statistics over the neighborhoods of ``graph``.

    Parameters
    ----------
    graph : AffinityGraph
        Neighborhoods are ``graph.neighbor_lists``; nodes with an empty list
        (non-exemplars of a learned graph) are skipped.
    labels : array of int
        Ground-truth classes.
    k : int, optional
        Reported neighborhood size; defaults to the longest list.
    similarity : (n, n) array, optional
        Pairwise similarity averaged over good/bad neighborhoods. Defaults to
        ``graph.W``.
    """
    if labels is None:
        raise DataError("neighborhood diagnostics need ground-truth labels")
    labels = np.asarray(labels)
    S = graph.W if similarity is None else np.asarray(similarity)
    bad_edges = edges = bad_nbh = nbh = 0
    sim_good, sim_bad = [], []
    for i, nb in enumerate(graph.neighbor_lists):
        nb = np.asarray(nb, dtype=np.int64)
        if nb.size == 0:
            continue
        mismatch = labels[nb] != labels[i]
        nbh += 1
        edges += nb.size
        bad_edges += int(mismatch.sum())
        is_bad = mismatch.mean() >= 0.5
        bad_nbh += int(is_bad)
        (sim_bad if is_bad else sim_good).extend(S[i, nb].tolist())
    if k is None:
        k = max((len(nb) for nb in graph.neighbor_lists), default=0)
    return DiagnosticsReport(
        pct_bad_nn=bad_edges / edges if edges else 0.0,
        pct_bad_nbh=bad_nbh / nbh if nbh else 0.0,
        sim_good_nbh=float(np.mean(sim_good)) if sim_good else None,
        sim_bad_nbh=float(np.mean(sim_bad)) if sim_bad else None,
        k_used=int(k),
        graph_source=getattr(graph, "source", "unknown"),
        n_neighborhoods=nbh,
    )
