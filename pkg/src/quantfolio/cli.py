"""Command-line front end: four staged commands with file handoffs.

    quantfolio select   --config run.cfg     asset selection artifacts
    quantfolio weights  --config run.cfg     four weight-vector JSONs
    quantfolio schedule --config run.cfg     walk-forward QAOA schedules
    quantfolio backtest --config run.cfg     metrics/curves CSV + manifest

The config file is plain ``key = value`` text (``#`` comments); every run is
fully determined by the config and the master seed -- no hidden environment
dependence. Exit codes: 0 success, 1 validation error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import date

import numpy as np

from . import __version__
from .allocation import (
    GaConfig,
    WeightVector,
    ensemble,
    equal_weights,
    ga_optimise,
    minvar,
    with_train_sharpe,
)
from .backtest import run_grid
from .clustering import select_representatives, ward_cluster
from .market_data import SplitSpec, load_csv, split, to_returns
from .qaoa import OPTIMISER, QaoaConfig, ScheduleResult, walk_forward
from .schedule_qubo import QuboParams
from .shrinkage import ledoit_wolf

log = logging.getLogger(__name__)

METHOD_ORDER = ("GA", "MinVar", "Equal", "Ensemble")


@dataclass
class RunConfig:
    """Resolved run parameters; defaults mirror the standard configuration."""

    prices_csv: str
    train_end: date
    test_end: date
    out_dir: str = "runs"
    n_clusters: int = 10
    ga_population: int = 300
    ga_generations: int = 200
    ga_mutation_rate: float = 0.15
    ga_gene_low: float = 0.01
    ga_gene_high: float = 1.0
    lambda_ent: float = 0.05
    depth: int = 2
    candidates_per_window: int = 8
    windows: int = 3
    restarts: int = 5
    opt_shots: int = 2048
    eval_shots: int = 4096
    max_iters: int = 150
    lambda1: float = 1.0
    lambda2: float = 0.5
    lambda3: float = 0.3
    cost_c: float = 0.001
    threshold: float = 0.05
    periodic: tuple[int, ...] = (1, 5, 10, 21)
    seed: int = 0

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["train_end"] = self.train_end.isoformat()
        out["test_end"] = self.test_end.isoformat()
        out["periodic"] = list(self.periodic)
        return out


_PARSERS = {
    "prices_csv": str,
    "out_dir": str,
    "train_end": date.fromisoformat,
    "test_end": date.fromisoformat,
    "n_clusters": int,
    "ga_population": int,
    "ga_generations": int,
    "ga_mutation_rate": float,
    "ga_gene_low": float,
    "ga_gene_high": float,
    "lambda_ent": float,
    "depth": int,
    "candidates_per_window": int,
    "windows": int,
    "restarts": int,
    "opt_shots": int,
    "eval_shots": int,
    "max_iters": int,
    "lambda1": float,
    "lambda2": float,
    "lambda3": float,
    "cost_c": float,
    "threshold": float,
    "periodic": lambda s: tuple(int(x) for x in s.split(",") if x.strip()),
    "seed": int,
}

_REQUIRED = ("prices_csv", "train_end", "test_end")


def parse_config(path) -> RunConfig:
    """Parse a ``key = value`` config file into a validated RunConfig."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _PARSERS[key](val)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ValueError(f"{path}: missing required key(s): {', '.join(missing)}")
    cfg = RunConfig(**values)
    if cfg.seed < 0:
        raise ValueError("seed must be non-negative")
    if cfg.train_end >= cfg.test_end:
        raise ValueError("train_end must precede test_end")
    if not os.path.exists(cfg.prices_csv):
        raise FileNotFoundError(f"prices CSV not found: {cfg.prices_csv}")
    return cfg


def _child_seed(master: int, tag: int) -> int:
    """Deterministic per-stage stream derived from the master seed."""
    return int(np.random.SeedSequence([master, tag]).generate_state(1, np.uint64)[0])


def _config_sha256(cfg: RunConfig) -> str:
    canon = "\n".join(f"{k} = {v}" for k, v in sorted(cfg.as_dict().items()))
    return hashlib.sha256(canon.encode()).hexdigest()


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True))
        fh.write("\n")


def _write_matrix_csv(path, tickers, matrix) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ticker", *tickers])
        for t, row in zip(tickers, matrix):
            writer.writerow([t, *[repr(float(v)) for v in row]])


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def _load_panels(cfg: RunConfig):
    panel = load_csv(cfg.prices_csv)
    returns = to_returns(panel)
    train, test = split(returns, SplitSpec(cfg.train_end, cfg.test_end))
    return panel, train, test


def _read_selection(cfg: RunConfig) -> list[str]:
    path = os.path.join(cfg.out_dir, "selection.json")
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path} not found: run the 'select' command first")
    with open(path) as fh:
        return list(json.load(fh)["tickers"])


def _weights_path(cfg: RunConfig, method: str) -> str:
    return os.path.join(cfg.out_dir, f"weights_{method.lower()}.json")


def _read_weights(cfg: RunConfig) -> dict[str, WeightVector]:
    out = {}
    for method in METHOD_ORDER:
        path = _weights_path(cfg, method)
        if not os.path.exists(path):
            raise FileNotFoundError(f"{path} not found: run the 'weights' command first")
        with open(path) as fh:
            blob = json.load(fh)
        out[method] = WeightVector(
            tuple(blob["tickers"]),
            np.asarray(blob["weights"], dtype=float),
            blob["method"],
            blob.get("train_sharpe"),
        )
    return out


def _read_schedules(cfg: RunConfig) -> dict[str, np.ndarray]:
    out = {}
    for method in METHOD_ORDER:
        path = os.path.join(cfg.out_dir, f"schedule_{method.lower()}.json")
        if not os.path.exists(path):
            raise FileNotFoundError(f"{path} not found: run the 'schedule' command first")
        with open(path) as fh:
            out[method] = np.asarray(json.load(fh)["schedule"], dtype=np.uint8)
    return out


def cmd_select(cfg: RunConfig) -> dict:
    """Cluster the training universe and pick one representative per cluster.

    Writes selection.json plus the full shrinkage correlation and angular
    distance matrices as CSV.
    """
    panel, train, _ = _load_panels(cfg)
    cov = ledoit_wolf(train)
    assign = ward_cluster(cov.dist, cfg.n_clusters)
    selection = select_representatives(assign, train)

    os.makedirs(cfg.out_dir, exist_ok=True)
    sel_path = os.path.join(cfg.out_dir, "selection.json")
    _write_json(sel_path, {
        "tickers": list(selection.tickers),
        "per_cluster_sharpe": [float(s) for s in selection.per_cluster_sharpe],
        "n_clusters": assign.n_clusters,
        "labels": {t: int(lbl) for t, lbl in zip(train.tickers, assign.labels)},
        "shrinkage_alpha": cov.alpha,
        "dropped_tickers": list(panel.dropped),
    })
    corr_path = os.path.join(cfg.out_dir, "correlation.csv")
    dist_path = os.path.join(cfg.out_dir, "distance.csv")
    _write_matrix_csv(corr_path, train.tickers, cov.corr)
    _write_matrix_csv(dist_path, train.tickers, cov.dist)
    log.info("selected %s", ", ".join(selection.tickers))
    return {"selection": sel_path, "correlation": corr_path, "distance": dist_path}


def cmd_weights(cfg: RunConfig) -> dict:
    """Compute the four weight vectors for the selected assets."""
    selected = _read_selection(cfg)
    _, train, _ = _load_panels(cfg)
    train_sel = train.restrict(selected)

    ga = ga_optimise(train_sel, GaConfig(
        population=cfg.ga_population,
        generations=cfg.ga_generations,
        mutation_rate=cfg.ga_mutation_rate,
        gene_low=cfg.ga_gene_low,
        gene_high=cfg.ga_gene_high,
        lambda_ent=cfg.lambda_ent,
        seed=_child_seed(cfg.seed, 1),
    ))
    mv = with_train_sharpe(minvar(ledoit_wolf(train).restrict(selected)), train)
    eq = with_train_sharpe(equal_weights(selected), train)
    ens = with_train_sharpe(ensemble(ga, mv, eq), train)

    paths = {}
    for wv in (ga, mv, eq, ens):
        path = _weights_path(cfg, wv.method)
        _write_json(path, wv.to_json_dict())
        paths[wv.method] = path
    return paths


def cmd_schedule(cfg: RunConfig) -> dict:
    """Run the walk-forward QAOA scheduler for every weight method."""
    selected = _read_selection(cfg)
    weights = _read_weights(cfg)
    _, _, test = _load_panels(cfg)
    test_sel = test.restrict(selected)
    qubo_params = QuboParams(cfg.lambda1, cfg.lambda2, cfg.lambda3, cfg.cost_c)

    paths = {}
    for i, method in enumerate(METHOD_ORDER):
        qcfg = QaoaConfig(
            depth=cfg.depth,
            restarts=cfg.restarts,
            opt_shots=cfg.opt_shots,
            eval_shots=cfg.eval_shots,
            max_iters=cfg.max_iters,
            seed=_child_seed(cfg.seed, 10 + i),
        )
        result = walk_forward(
            test_sel, weights[method], cfg.windows, cfg.candidates_per_window,
            qcfg, qubo_params,
        )
        sched_path = os.path.join(cfg.out_dir, f"schedule_{method.lower()}.json")
        blob = result.to_json_dict()
        blob["method"] = method
        _write_json(sched_path, blob)
        hist_path = os.path.join(cfg.out_dir, f"histogram_{method.lower()}.csv")
        _write_histogram_csv(hist_path, result)
        paths[method] = sched_path
        log.info("%s: %d rebalances scheduled", method, result.total_rebalances)
    return paths


def _write_histogram_csv(path, result: ScheduleResult) -> None:
    """Full per-window measurement histogram, count desc (ties by bitstring
    value asc); the first 20 rows of each window are the top-20 export."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "bitstring", "count"])
        for k, win in enumerate(result.windows):
            for bitstring, count in win.outcome.histogram_nonzero():
                writer.writerow([k, bitstring, count])


def cmd_backtest(cfg: RunConfig) -> dict:
    """Run the full strategy grid and write the report artifacts."""
    selected = _read_selection(cfg)
    weights = _read_weights(cfg)
    schedules = _read_schedules(cfg)
    _, _, test = _load_panels(cfg)
    test_sel = test.restrict(selected)

    reports = run_grid(
        test_sel, weights, schedules, cfg.cost_c,
        periodic=cfg.periodic, threshold=cfg.threshold,
    )

    metrics_path = os.path.join(cfg.out_dir, "metrics.csv")
    with open(metrics_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "strategy", "return_pct", "sharpe", "sortino",
            "mdd_pct", "calmar", "rebalances", "cost_bp",
        ])
        for rep in reports:
            writer.writerow([
                rep.label,
                _fmt(100.0 * rep.total_return),
                _fmt(rep.sharpe),
                _fmt(rep.sortino),
                _fmt(100.0 * rep.mdd),
                _fmt(rep.calmar),
                rep.rebalance_count,
                _fmt(rep.total_cost_bp),
            ])

    curves_path = os.path.join(cfg.out_dir, "curves.csv")
    with open(curves_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "day", "date", "value", "drawdown"])
        dates = ["start"] + [d.isoformat() for d in test_sel.dates]
        for rep in reports:
            peak = np.maximum.accumulate(rep.equity_curve)
            drawdown = rep.equity_curve / peak - 1.0
            for day, (d, v, dd) in enumerate(zip(dates, rep.equity_curve, drawdown)):
                writer.writerow([rep.label, day, d, repr(float(v)), repr(float(dd))])

    manifest_path = os.path.join(cfg.out_dir, "manifest.json")
    _write_json(manifest_path, {
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.as_dict(),
        "config_sha256": _config_sha256(cfg),
        "optimiser": OPTIMISER,
        "curve_returns": "log",
        "strategies": [rep.label for rep in reports],
    })
    return {"metrics": metrics_path, "curves": curves_path, "manifest": manifest_path}


_COMMANDS = {
    "select": cmd_select,
    "weights": cmd_weights,
    "schedule": cmd_schedule,
    "backtest": cmd_backtest,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quantfolio",
        description="Clustered asset selection, weight optimisation, "
                    "QUBO/QAOA rebalancing schedules, and a net-of-cost backtest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0].lower())
        p.add_argument("--config", required=True, help="path to the key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="override the output directory")

    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ValueError("seed must be non-negative")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out_dir=args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        artifacts = _COMMANDS[args.command](cfg)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary: report and signal runtime failure
        print(f"runtime error [{args.command}]: {exc}", file=sys.stderr)
        return 2
    for name, path in artifacts.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
