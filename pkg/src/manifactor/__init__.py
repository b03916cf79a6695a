"""Selective manifold regularized matrix factorization for clustering."""

from .config import SolverConfig, load_config, parse_config
from .data import LabeledDataset, gen_moons, load_csv, preprocess, save_csv
from .errors import (
    ConfigError,
    DataError,
    ManifactorError,
    NumericError,
    ParseError,
    SelectionError,
    ShapeError,
)
from .fast import solve_fast, update_Z_fast
from .metrics import accuracy, cluster_labels, neighborhood_diagnostics, nmi
from .solver import SolveResult, solve

__version__ = "0.1.0"

__all__ = [
    "SolverConfig", "load_config", "parse_config",
    "LabeledDataset", "gen_moons", "load_csv", "preprocess", "save_csv",
    "ConfigError", "DataError", "ManifactorError", "NumericError", "ParseError",
    "SelectionError", "ShapeError",
    "solve", "solve_fast", "update_Z_fast", "SolveResult",
    "accuracy", "cluster_labels", "neighborhood_diagnostics", "nmi",
]
