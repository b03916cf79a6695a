"""Dataset loading, preprocessing and the synthetic two-moons generator.

Matrices follow the column-instance convention: ``X`` is ``m x n`` with one
instance per column. CSV files on disk store one instance per row.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import special_ortho_group

from .errors import ConfigError, DataError, ParseError

_UNIT_TOL = 1e-12


@dataclass
class LabeledDataset:
    """Column-instance data matrix with optional integer labels."""

    X: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] | None = None
    label_names: list[str] | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X, dtype=np.float64).tobytes())
        if self.labels is not None:
            h.update(np.ascontiguousarray(self.labels, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=None) -> LabeledDataset:
    """Read a comma-separated table with instances as rows.

    Parameters
    ----------
    path : path-like
        File to read. A header row is detected when any feature cell of the
        first row is not numeric, and is required when ``label_column`` is a name.
    label_column : str or int, optional
        Column holding the class labels. Labels are mapped to integer codes in
        order of first appearance.

    Returns
    -------
    LabeledDataset
        ``X`` holds the raw values transposed to ``m x n``.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: empty file")

    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    rows = [[c.strip() for c in r] for r in rows]

    label_idx = None
    if isinstance(label_column, (int, np.integer)) and not isinstance(label_column, bool):
        if not -width <= label_column < width:
            raise ConfigError(f"label column index {label_column} out of range for {width} columns")
        label_idx = int(label_column) % width

    first_features = [c for j, c in enumerate(rows[0]) if j != label_idx]
    has_header = isinstance(label_column, str) or not all(_is_number(c) for c in first_features)
    header = rows[0] if has_header else None
    body = rows[1:] if has_header else rows

    if isinstance(label_column, str):
        if label_column not in header:
            raise ConfigError(f"label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
    if not body:
        raise ParseError(f"{path}: no data rows")

    feat_idx = [j for j in range(width) if j != label_idx]
    if not feat_idx:
        raise ParseError(f"{path}: no feature columns")
    X = np.empty((len(body), len(feat_idx)))
    for i, r in enumerate(body):
        for jj, j in enumerate(feat_idx):
            try:
                X[i, jj] = float(r[j])
            except ValueError:
                lineno = i + 1 + int(has_header)
                raise ParseError(
                    f"{path}: non-numeric value {r[j]!r} at row {lineno}, column {j + 1}"
                ) from None
    if not np.all(np.isfinite(X)):
        raise ParseError(f"{path}: non-finite feature values")

    labels = label_names = None
    if label_idx is not None:
        codes: dict[str, int] = {}
        labels = np.array([codes.setdefault(r[label_idx], len(codes)) for r in body], dtype=np.int64)
        label_names = list(codes)
    names = [header[j] for j in feat_idx] if header else None
    return LabeledDataset(X.T.copy(), labels, names, label_names)


def save_csv(ds: LabeledDataset, path, label_column: str = "label") -> None:
    """Write ``ds`` with instances as rows and a trailing label column."""
    names = ds.feature_names or [f"x{i}" for i in range(ds.m)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names + ([label_column] if ds.labels is not None else []))
        for j in range(ds.n):
            row = [repr(float(v)) for v in ds.X[:, j]]
            if ds.labels is not None:
                row.append(str(int(ds.labels[j])))
            w.writerow(row)


def _is_conforming(X: np.ndarray) -> bool:
    if X.shape[1] < 2 or X.min() < 0 or X.max() > 1:
        return False
    norms = np.linalg.norm(X, axis=0)
    if np.any((np.abs(norms - 1) > _UNIT_TOL) & (norms != 0)):
        return False
    if np.any(X.max(axis=1) == X.min(axis=1)):
        return False
    return np.unique(X, axis=1).shape[1] == X.shape[1]


def _drop_constant_rows(X, names):
    keep = X.max(axis=1) > X.min(axis=1)
    names = [nm for nm, k in zip(names, keep) if k] if names else names
    return X[keep], names, not keep.all()


def _drop_duplicate_cols(X, labels):
    _, first = np.unique(X, axis=1, return_index=True)
    first = np.sort(first)
    removed = first.size < X.shape[1]
    return X[:, first], (labels[first] if labels is not None else None), removed


def preprocess(ds: LabeledDataset, normalize: bool = True) -> LabeledDataset:
    """Remove duplicates and constant features, min-max scale, L2-normalize.

    Surviving instances keep their original order. Data that already satisfies
    every output invariant is returned unchanged, so the operation is
    idempotent. With ``normalize=False`` only the cleaning and min-max scaling
    are applied.
    """
    X = np.asarray(ds.X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2 or np.unique(X, axis=1).shape[1] < 2:
        raise DataError("preprocessing needs at least 2 distinct instances")
    labels = None if ds.labels is None else np.asarray(ds.labels)
    names = list(ds.feature_names) if ds.feature_names else None

    if normalize and _is_conforming(X):
        return LabeledDataset(X.copy(), labels, names, ds.label_names)

    X, labels, _ = _drop_duplicate_cols(X, labels)
    X, names, _ = _drop_constant_rows(X, names)
    if X.shape[0] == 0:
        raise DataError("every feature is constant")
    lo = X.min(axis=1, keepdims=True)
    X = (X - lo) / (X.max(axis=1, keepdims=True) - lo)

    if normalize:
        while True:
            norms = np.linalg.norm(X, axis=0)
            X = X / np.where(norms > 0, norms, 1.0)
            X, labels, dup = _drop_duplicate_cols(X, labels)
            X, names, const = _drop_constant_rows(X, names)
            if X.shape[1] < 2 or X.shape[0] == 0:
                raise DataError("preprocessing left fewer than 2 distinct instances")
            if not (dup or const):
                break
    return LabeledDataset(X, labels, names, ds.label_names)


def gen_moons(n_per_cluster: int = 250, noise_sigma: float = 0.1,
              ambient_dim: int = 2, seed: int = 0) -> LabeledDataset:
    """Two interleaving half circles of unit radius.

    The upper moon is centered at the origin, the lower one at ``(1, 0.5)``.
    For ``ambient_dim=10`` the noisy 2D points get 8 extra Gaussian coordinates
    with the same ``noise_sigma`` and the result is rotated by a seeded random
    rotation.
    """
    if ambient_dim not in (2, 10):
        raise ConfigError(f"ambient_dim must be 2 or 10, got {ambient_dim}")
    if n_per_cluster < 1:
        raise ConfigError("n_per_cluster must be >= 1")
    if noise_sigma < 0:
        raise ConfigError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, n_per_cluster)
    upper = np.vstack([np.cos(t), np.sin(t)])
    lower = np.vstack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    P = np.hstack([upper, lower])
    n = P.shape[1]
    P = P + noise_sigma * rng.standard_normal(P.shape)
    if ambient_dim == 10:
        extra = noise_sigma * rng.standard_normal((8, n))
        Q = special_ortho_group.rvs(10, random_state=rng)
        P = Q @ np.vstack([P, extra])
    labels = np.repeat(np.arange(2, dtype=np.int64), n_per_cluster)
    return LabeledDataset(P, labels, [f"x{i}" for i in range(ambient_dim)])
