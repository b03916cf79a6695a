"""Structured run reports (JSON document plus an optional flat CSV metric row)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graph import heat_affinity, masked_graph
from .metrics import NMI_NORMALIZATION, accuracy, neighborhood_diagnostics, nmi

SCHEMA_VERSION = 1
CSV_FIELDS = ("algorithm", "dataset_hash", "n", "m", "c", "lambda", "beta", "acc", "nmi",
              "iterations", "converged", "final_objective", "wall_time_seconds")


def _clean(x):
    """JSON-safe floats: NaN/Inf become None."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating,)):
        return _clean(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def sparse_triplets(M) -> dict:
    """Nonzero entries of ``M`` as parallel row/col/value lists."""
    if M is None:
        return None
    r, c = np.nonzero(M)
    return {"shape": list(M.shape), "rows": r.tolist(), "cols": c.tolist(), "vals": M[r, c].tolist()}


def dense_from_triplets(t) -> np.ndarray:
    M = np.zeros(tuple(t["shape"]))
    M[np.asarray(t["rows"], dtype=int), np.asarray(t["cols"], dtype=int)] = t["vals"]
    return M


@dataclass
class RunReport:
    config: dict
    dataset: dict
    algorithm: str
    acc: float | None = None
    nmi: float | None = None
    iterations: int = 0
    converged: bool = False
    objective_trace: list = field(default_factory=list)
    residual_trace: list = field(default_factory=list)
    exemplar_indices: list = field(default_factory=list)
    diagnostics_before: dict | None = None
    diagnostics_after: dict | None = None
    wall_time_seconds: float = 0.0
    zhat: dict | None = None
    grid: list | None = None
    error: str | None = None
    schema_version: int = SCHEMA_VERSION
    nmi_normalization: str = NMI_NORMALIZATION

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    def csv_row(self) -> dict:
        obj = self.objective_trace[-1] if self.objective_trace else None
        return {
            "algorithm": self.algorithm, "dataset_hash": self.dataset.get("hash"),
            "n": self.dataset.get("n"), "m": self.dataset.get("m"), "c": self.config.get("c"),
            "lambda": self.config.get("lambda"), "beta": self.config.get("beta"),
            "acc": self.acc, "nmi": self.nmi, "iterations": self.iterations,
            "converged": self.converged, "final_objective": obj,
            "wall_time_seconds": self.wall_time_seconds,
        }

    def write_csv(self, path) -> None:
        """Append the metric row, writing the header when the file is new."""
        p = Path(path)
        new = not p.exists() or p.stat().st_size == 0
        with p.open("a", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            if new:
                w.writeheader()
            w.writerow(_clean(self.csv_row()))


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def dataset_info(ds, cfg) -> dict:
    return {"n": ds.n, "m": ds.m, "c": cfg.c, "hash": ds.fingerprint(),
            "labeled": ds.labels is not None}


def diagnostics_pair(X, labels, k, mode, Zhat=None):
    """Neighborhood diagnostics of the input heat-kernel graph and, if given, of ``Zhat``."""
    before = neighborhood_diagnostics(heat_affinity(X, k, mode), labels, k).to_dict()
    after = None
    if Zhat is not None:
        after = neighborhood_diagnostics(masked_graph(Zhat), labels, k).to_dict()
    return before, after


def build_report(result, ds, cfg, with_diagnostics=True) -> RunReport:
    rep = RunReport(
        config=cfg.to_dict(), dataset=dataset_info(ds, cfg), algorithm=result.algorithm,
        iterations=result.iterations, converged=result.converged,
        objective_trace=list(result.objective_trace),
        residual_trace=[list(r) for r in result.residual_trace],
        exemplar_indices=np.asarray(result.exemplar_indices).tolist(),
        wall_time_seconds=result.wall_time_seconds,
        zhat=sparse_triplets(result.Zhat),
    )
    if ds.labels is not None:
        rep.acc = accuracy(result.labels, ds.labels)
        rep.nmi = nmi(result.labels, ds.labels)
        if with_diagnostics:
            rep.diagnostics_before, rep.diagnostics_after = diagnostics_pair(
                ds.X, ds.labels, cfg.k(ds.n), cfg.bandwidth_mode, result.Zhat)
    return rep
