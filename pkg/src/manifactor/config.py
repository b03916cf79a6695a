"""Solver configuration and the flat ``key=value`` config file format."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

ALGORITHMS = ("nmf", "rmnmf", "smrmf", "smrmf_euc", "smrmf_ns", "f_smrmf")
BANDWIDTH_MODES = ("distance", "squared_distance")
MASK_SOURCES = ("z_rows", "input")
CHAT_STEPS = ("simplex", "l1inf")

# config-file key -> dataclass attribute, where they differ
_KEY_ALIASES = {"lambda": "lam"}
_ATTR_KEYS = {v: k for k, v in _KEY_ALIASES.items()}


@dataclass
class SolverConfig:
    """All knobs of the factorization solvers.

    ``lam`` is written ``lambda`` in config files. ``k_neighbors`` is either a
    positive integer or the string ``"sqrt_n"`` (resolved to ``ceil(sqrt(n))``).
    ``delta`` is the strong-convexity weight of the exemplar initializer, while
    ``fast_delta`` is the quadratic weight used by the fast solver's Z step.
    """

    algorithm: str = "smrmf"
    c: int = 2
    lam: float = 0.1
    beta: float = 0.1
    delta: float = 0.01
    fast_delta: float = 1.0
    tau_fraction: float = 0.1
    k_neighbors: int | str = "sqrt_n"
    rho: float = 1.05
    mu0: float = 0.1
    max_iter: int = 1000
    tol: float = 1e-4
    seed: int = 0
    early_term_threshold: float = 1e-5
    early_term_min_n: int = 2000
    bandwidth_mode: str = "distance"
    gamma_mean: bool | None = None
    mask_source: str = "z_rows"
    chat_step: str = "l1inf"
    init_max_iter: int = 1000
    init_tol: float = 1e-5

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(key, msg):
            raise ConfigError(f"{_ATTR_KEYS.get(key, key)}: {msg}")

        if self.algorithm not in ALGORITHMS:
            bad("algorithm", f"must be one of {ALGORITHMS}, got {self.algorithm!r}")
        for name in ("c", "max_iter", "init_max_iter", "early_term_min_n"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                bad(name, f"must be a positive integer, got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            bad("seed", f"must be an unsigned integer, got {self.seed!r}")
        for name in ("lam", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                bad(name, f"must be >= 0, got {v!r}")
        for name in ("delta", "fast_delta", "mu0", "tol", "early_term_threshold", "init_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                bad(name, f"must be > 0, got {v!r}")
        if not (0 < self.tau_fraction <= 1):
            bad("tau_fraction", f"must lie in (0, 1], got {self.tau_fraction!r}")
        if not (math.isfinite(self.rho) and self.rho > 1):
            bad("rho", f"must be > 1, got {self.rho!r}")
        k = self.k_neighbors
        if k != "sqrt_n" and (isinstance(k, bool) or not isinstance(k, int) or k < 1):
            bad("k_neighbors", f"must be a positive integer or 'sqrt_n', got {k!r}")
        if self.bandwidth_mode not in BANDWIDTH_MODES:
            bad("bandwidth_mode", f"must be one of {BANDWIDTH_MODES}")
        if self.mask_source not in MASK_SOURCES:
            bad("mask_source", f"must be one of {MASK_SOURCES}")
        if self.chat_step not in CHAT_STEPS:
            bad("chat_step", f"must be one of {CHAT_STEPS}")

    def tau(self, n: int) -> int:
        """Number of exemplars for ``n`` instances."""
        t = max(1, math.ceil(self.tau_fraction * n - 1e-9))
        if t < self.c:
            warnings.warn(f"tau={t} is smaller than the rank c={self.c}", stacklevel=2)
        return t

    def k(self, n: int) -> int:
        """Neighborhood size for ``n`` instances, capped at ``n - 1``."""
        k = math.ceil(math.sqrt(n)) if self.k_neighbors == "sqrt_n" else self.k_neighbors
        return max(1, min(k, n - 1))

    def use_gamma_mean(self) -> bool:
        if self.gamma_mean is None:
            return self.algorithm == "f_smrmf"
        return self.gamma_mean

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {_ATTR_KEYS.get(f.name, f.name): getattr(self, f.name)
                for f in dataclasses.fields(self)}


_FIELDS = {f.name: f for f in dataclasses.fields(SolverConfig)}


def _coerce(attr: str, raw: str):
    default = _FIELDS[attr].default
    raw = raw.strip()
    if attr == "k_neighbors":
        return raw if raw == "sqrt_n" else int(raw)
    if attr == "gamma_mean":
        if raw.lower() in ("", "none", "auto"):
            return None
        return _parse_bool(raw)
    if isinstance(default, bool):
        return _parse_bool(raw)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_config(text: str, **overrides) -> SolverConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        attr = _KEY_ALIASES.get(key, key)
        if attr not in _FIELDS:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        try:
            values[attr] = _coerce(attr, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None
    values.update(overrides)
    return SolverConfig(**values)


def load_config(path) -> SolverConfig:
    """Read a :class:`SolverConfig` from a flat ``key=value`` file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: SolverConfig) -> str:
    """Serialize to the ``key=value`` format accepted by :func:`parse_config`."""
    lines = []
    for key, value in cfg.to_dict().items():
        if value is None:
            value = "auto"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def save_config(cfg: SolverConfig, path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8")
