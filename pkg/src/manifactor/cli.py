"""Command-line interface: ``manifactor {gen-moons,run,diagnose,bench}``.

Exit codes: 0 success, 2 usage or configuration problem, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ALGORITHMS, SolverConfig, load_config
from .data import gen_moons, load_csv, preprocess, save_csv
from .errors import ManifactorError, NumericError
from .fast import default_workers
from .report import RunReport, build_report, dataset_info, dense_from_triplets, diagnostics_pair, load_report
from .solver import solve

log = logging.getLogger("manifactor")

GRID_VALUES = (1e-3, 1e-2, 1e-1, 1.0)
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _load_dataset(args, need_labels=False):
    label_col = args.label_column
    if label_col is not None and label_col.lstrip("-").isdigit():
        label_col = int(label_col)
    ds = load_csv(args.data, label_column=label_col)
    if need_labels and ds.labels is None:
        raise UsageError("this command needs a labeled dataset (use --label-column)")
    if args.preprocess != "none":
        ds = preprocess(ds, normalize=args.preprocess == "full")
    return ds


def _config(args) -> SolverConfig:
    cfg = load_config(args.config) if args.config else SolverConfig()
    changes = {}
    if getattr(args, "algorithm", None):
        changes["algorithm"] = args.algorithm
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "clusters", None) is not None:
        changes["c"] = args.clusters
    cfg = cfg.replace(**changes)
    cfg.validate()
    return cfg


def grid_cells(cfg: SolverConfig) -> list[SolverConfig]:
    """lambda x beta sweep; parameters a variant does not use are held fixed."""
    if cfg.algorithm == "nmf":
        return [cfg]
    if cfg.algorithm == "rmnmf":
        return [cfg.replace(lam=lam) for lam in GRID_VALUES]
    return [cfg.replace(lam=lam, beta=beta) for lam, beta in itertools.product(GRID_VALUES, GRID_VALUES)]


def _run_cell(X, labels, cfg):
    from .metrics import accuracy, nmi

    try:
        res = solve(X, cfg)
    except NumericError as exc:
        return {"lambda": cfg.lam, "beta": cfg.beta, "error": str(exc)}
    cell = {"lambda": cfg.lam, "beta": cfg.beta, "iterations": res.iterations,
            "converged": res.converged,
            "final_objective": res.objective_trace[-1] if res.objective_trace else None,
            "wall_time_seconds": res.wall_time_seconds}
    if labels is not None:
        cell["acc"] = accuracy(res.labels, labels)
        cell["nmi"] = nmi(res.labels, labels)
    return cell


def _best_cell(cells, labeled):
    ok = [c for c in cells if "error" not in c]
    if not ok:
        return None
    if labeled:
        return max(ok, key=lambda c: (c["acc"], c["nmi"]))
    return min(ok, key=lambda c: c["final_objective"])


def cmd_gen_moons(args) -> int:
    ds = gen_moons(args.n_per_cluster, args.noise, args.dim, args.seed)
    save_csv(ds, args.out)
    print(f"wrote {ds.n} x {ds.m} moons to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    ds = _load_dataset(args)
    cfg = _config(args)
    grid = None
    if args.grid:
        cells_cfg = grid_cells(cfg)
        workers = min(default_workers(), len(cells_cfg))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                grid = list(pool.map(_run_cell, itertools.repeat(ds.X), itertools.repeat(ds.labels), cells_cfg))
        else:
            grid = [_run_cell(ds.X, ds.labels, c) for c in cells_cfg]
        best = _best_cell(grid, ds.labels is not None)
        if best is None:
            raise NumericError("every grid cell failed")
        cfg = cfg.replace(lam=best["lambda"], beta=best["beta"])
    try:
        result = solve(ds.X, cfg)
    except NumericError as exc:
        partial = getattr(exc, "partial", {})
        rep = RunReport(config=cfg.to_dict(), dataset=dataset_info(ds, cfg), algorithm=cfg.algorithm,
                        iterations=partial.get("iterations", 0),
                        objective_trace=partial.get("objective_trace", []),
                        residual_trace=[list(r) for r in partial.get("residual_trace", [])],
                        grid=grid, error=str(exc))
        rep.write_json(args.out)
        raise
    rep = build_report(result, ds, cfg, with_diagnostics=not args.no_diagnostics)
    rep.grid = grid
    rep.write_json(args.out)
    if args.csv:
        rep.write_csv(args.csv)
    msg = f"{cfg.algorithm}: iterations={rep.iterations} converged={rep.converged}"
    if rep.acc is not None:
        msg += f" acc={rep.acc:.4f} nmi={rep.nmi:.4f}"
    print(msg)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    ds = _load_dataset(args, need_labels=True)
    cfg = _config(args)
    Zhat = None
    if args.report:
        rep = load_report(args.report)
        if rep.get("zhat") is None:
            raise UsageError(f"{args.report} holds no learned affinity")
        Zhat = dense_from_triplets(rep["zhat"])
        if Zhat.shape != (ds.n, ds.n):
            raise UsageError("report and dataset sizes differ")
        if args.zhat_out:
            with open(args.zhat_out, "w", encoding="utf-8") as fh:
                fh.write("i,j,value\n")
                for i, j, v in zip(rep["zhat"]["rows"], rep["zhat"]["cols"], rep["zhat"]["vals"]):
                    fh.write(f"{i},{j},{v!r}\n")
    before, after = diagnostics_pair(ds.X, ds.labels, cfg.k(ds.n), cfg.bandwidth_mode, Zhat)
    doc = {"schema_version": 1, "dataset": dataset_info(ds, cfg), "before": before, "after": after}
    text = json.dumps(doc, indent=1)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    """Wall time of several algorithms on one seeded synthetic problem."""
    rng = np.random.default_rng(args.seed)
    n, m, c = args.n, args.m, args.clusters
    centers = rng.uniform(0.0, 1.0, (m, c))
    labels = rng.integers(0, c, n)
    X = np.clip(centers[:, labels] + 0.1 * rng.standard_normal((m, n)), 0.0, None)
    base = SolverConfig(c=c, max_iter=args.max_iter, seed=args.seed)
    rows = []
    for alg in args.algorithms:
        t = time.perf_counter()
        res = solve(X, base.replace(algorithm=alg))
        rows.append({"algorithm": alg, "wall_time_seconds": time.perf_counter() - t,
                     "iterations": res.iterations, "z_step_ops": res.op_counts.get("z_step", 0.0)})
        print(f"{alg:10s} {rows[-1]['wall_time_seconds']:8.2f} s  {res.iterations} iterations")
    if args.out:
        Path(args.out).write_text(json.dumps({"n": n, "m": m, "c": c, "runs": rows}, indent=1),
                                  encoding="utf-8")
    return EXIT_OK


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file, one instance per row")
    p.add_argument("--label-column", default="label",
                   help="name or index of the label column; 'none' for unlabeled data")
    p.add_argument("--preprocess", choices=("full", "scale", "none"), default="full",
                   help="full: dedupe, min-max scale, unit L2 columns; scale: no L2 step")
    p.add_argument("--config", help="key=value solver configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--clusters", "-c", type=int, help="number of clusters (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manifactor", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-moons", help="write a two-moons CSV")
    p.add_argument("--n-per-cluster", type=int, default=250)
    p.add_argument("--dim", type=int, choices=(2, 10), default=2)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_moons)

    p = sub.add_parser("run", help="factorize a dataset and write a JSON report")
    _add_data_args(p)
    p.add_argument("--algorithm", choices=ALGORITHMS)
    p.add_argument("--grid", action="store_true", help="sweep lambda and beta over {1e-3, 1e-2, 1e-1, 1}")
    p.add_argument("--out", required=True, help="report path (JSON)")
    p.add_argument("--csv", help="append the metric row to this CSV file")
    p.add_argument("--no-diagnostics", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diagnose", help="neighborhood label-mismatch statistics")
    _add_data_args(p)
    p.add_argument("--report", help="run report whose learned affinity gives the 'after' statistics")
    p.add_argument("--zhat-out", help="write the learned affinity as i,j,value triplets")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("bench", help="time solvers on a seeded synthetic problem")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--clusters", "-c", type=int, default=5)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS, default=["smrmf", "f_smrmf"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "label_column", None) in ("none", ""):
        args.label_column = None
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ManifactorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
