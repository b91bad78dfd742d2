"""Command-line experiment runner.

Subcommands: ``run``, ``compare``, ``grid`` and ``gen-toy``. Exit codes are
0 on success, 1 on a runtime failure and 2 on a configuration error.

Reports are line-delimited JSON records. Every record except the one with
``"record": "timing"`` is deterministic for a fixed config and seed.
"""
import argparse
import csv
import json
import logging
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .classify import accuracy
from .config import PROFILES, load_config
from .data import Dataset, load_csv, load_pair, pca_reduce, save_csv, two_moon
from .errors import ConfigError, NetAdaptError
from .selection import grid_search, worker_count
from .solver import HyperParams, jda_fit, kpca_fit, net_fit, tca_fit

logger = logging.getLogger("netadapt")


def load_data(cfg, seed):
    """``(source, target)`` datasets for one experiment; target may be ``None``."""
    if cfg.source.generator:
        g = cfg.generator
        src, tgt = two_moon(g.n_per_class, g.noise_sd, g.rotation_deg, g.translation, seed)
        if cfg.target is None:
            tgt = None
    elif cfg.target is None:
        src, tgt = load_csv(cfg.source.path, has_labels=True, role="source"), None
    else:
        src, tgt, _ = load_pair(cfg.source.path, cfg.target.path, cfg.target.has_labels)
    if cfg.pca_dim and tgt is not None:
        reduced = pca_reduce(np.hstack([src.features, tgt.features]), cfg.pca_dim)
        src = replace(src, features=reduced[:, : src.n])
        tgt = replace(tgt, features=reduced[:, src.n :])
    elif cfg.pca_dim:
        src = replace(src, features=pca_reduce(src.features, cfg.pca_dim))
    return src, tgt


def unlabeled(target):
    """Copy of the target with labels removed; only this copy reaches a fit."""
    blind = Dataset(target.features, None, target.name, "target")
    assert blind.labels is None
    return blind


def fit_algorithm(algo, src, tgt, kernel, hp):
    """Fit one algorithm. ``tgt`` must be label-free."""
    if tgt is not None and tgt.labels is not None:
        raise AssertionError("target labels must never reach a fit")
    if algo == "kpca":
        if tgt is None:
            return kpca_fit(src.features, kernel, hp.k)
        x = np.hstack([src.features, tgt.features])
        return kpca_fit(x, kernel, hp.k, n_source=src.n, y_source=src.labels)
    if tgt is None:
        raise ConfigError(f"algorithm {algo!r} needs a [target] section")
    fit = {"net": net_fit, "jda": jda_fit, "tca": tca_fit}[algo]
    return fit(src.features, src.labels, tgt.features, kernel, hp)


def _params(cfg):
    if cfg.params is not None:
        return cfg.params
    return HyperParams()


def _float(v):
    return None if v is None else float(v)


def run_records(cfg, seed, algo=None):
    """Deterministic report records for a single fit."""
    algo = algo or cfg.algorithm
    hp = _params(cfg)
    src, tgt = load_data(cfg, seed)
    truth = tgt.labels if tgt is not None else None
    blind = unlabeled(tgt) if tgt is not None else None
    res = fit_algorithm(algo, src, blind, cfg.kernel, hp)
    records = [
        {"record": "config", "seed": seed, "config": cfg.echo()},
        {
            "record": "kernel",
            "kind": cfg.kernel.kind,
            "resolved_bandwidth": _float(res.kernel.resolved_bandwidth),
        },
    ]
    adaptive = algo != "kpca"
    if adaptive:
        for i, (pred, (mmd_val, embed_val)) in enumerate(
            zip(res.target_label_history, res.objective_history), start=1
        ):
            rec = {"record": "iteration", "iteration": i, "mmd": mmd_val, "embed": embed_val}
            if truth is not None:
                rec["pseudo_label_accuracy"] = accuracy(pred, truth)
            records.append(rec)
    result = {
        "record": "result",
        "algorithm": algo,
        "n_source": src.n,
        "n_target": tgt.n if tgt is not None else 0,
        "k": hp.k,
        "eigenvalues": [float(v) for v in res.eigenvalues],
    }
    if adaptive:
        fixed = algo in ("jda", "tca")
        result.update(alpha=1.0 if fixed else hp.alpha, beta=0.0 if fixed else hp.beta)
        result.update(gamma=hp.gamma, ridge=res.ridge)
    if truth is not None and res.target_pred is not None:
        result["target_accuracy"] = accuracy(res.target_pred, truth)
    records.append(result)
    return records, res


def write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _out_path(args, cfg, default):
    if args.out:
        return Path(args.out)
    if cfg.output:
        return cfg.output
    return Path(default)


def cmd_run(args, cfg):
    start = time.perf_counter()
    records, _ = run_records(cfg, cfg.seed)
    records.append(
        {"record": "timing", "deterministic": False, "wall_time_s": time.perf_counter() - start}
    )
    out = _out_path(args, cfg, "report.jsonl")
    write_records(out, records)
    result = next(r for r in records if r["record"] == "result")
    acc = result.get("target_accuracy")
    acc_text = "n/a" if acc is None else f"{100 * acc:.2f}%"
    print(f"algorithm  {result['algorithm']}")
    print(f"k          {result['k']}")
    print(f"accuracy   {acc_text}")
    print(f"report     {out}")
    return 0


def mark_ranks(rows):
    """Tag the best (``**``) and second best (``*``) accuracy per experiment."""
    by_exp = {}
    for row in rows:
        by_exp.setdefault(row["experiment"], []).append(row)
    for group in by_exp.values():
        scores = sorted({r["accuracy"] for r in group if r["accuracy"] is not None}, reverse=True)
        for r in group:
            r["mark"] = ""
            if scores and r["accuracy"] == scores[0]:
                r["mark"] = "**"
            elif len(scores) > 1 and r["accuracy"] == scores[1]:
                r["mark"] = "*"
    return rows


def compare_rows(cfg, threads=1):
    algos = list(cfg.algorithms) or [cfg.algorithm]
    cells = [(seed, algo) for seed in cfg.seed_list() for algo in algos]

    def one(cell):
        seed, algo = cell
        records, _ = run_records(cfg, seed, algo)
        result = records[-1]
        acc = result.get("target_accuracy")
        if cfg.source.generator:
            name = f"seed{seed}"
        else:
            name = f"{cfg.source.path.stem}->{cfg.target.path.stem}"
            if len(cfg.seed_list()) > 1:
                name += f"#{seed}"
        return {
            "experiment": name,
            "algorithm": algo,
            "accuracy": None if acc is None else round(100 * acc, 2),
        }

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, cells))
    else:
        rows = [one(c) for c in cells]
    rows = mark_ranks(rows)
    if len({r["experiment"] for r in rows}) < 2:
        return rows
    for algo in algos:
        accs = [r["accuracy"] for r in rows if r["algorithm"] == algo and r["accuracy"] is not None]
        rows.append(
            {
                "experiment": "average",
                "algorithm": algo,
                "accuracy": round(float(np.mean(accs)), 2) if accs else None,
                "mark": "",
            }
        )
    return rows


def format_table(rows, columns):
    widths = {c: max(len(c), *(len(_cell(r.get(c))) for r in rows)) for c in columns}
    lines = ["  ".join(c.ljust(widths[c]) for c in columns)]
    lines.append("  ".join("-" * widths[c] for c in columns))
    for r in rows:
        lines.append("  ".join(_cell(r.get(c)).ljust(widths[c]) for c in columns))
    return "\n".join(lines)


def _cell(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def cmd_compare(args, cfg):
    rows = compare_rows(cfg, worker_count())
    out = _out_path(args, cfg, "compare.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["experiment", "algorithm", "accuracy", "mark"])
        writer.writeheader()
        for r in rows:
            writer.writerow({**r, "accuracy": "" if r["accuracy"] is None else f"{r['accuracy']:.2f}"})
    print(format_table(rows, ["experiment", "algorithm", "accuracy", "mark"]))
    return 0


GRID_COLUMNS = [
    "cell", "alpha", "beta", "gamma", "k", "iterations",
    "validation_accuracy", "target_accuracy", "status",
]


def cmd_grid(args, cfg):
    if cfg.grid is None:
        raise ConfigError("the grid command needs a [grid] section")
    algo = cfg.algorithm
    if algo not in ("net", "jda"):
        raise ConfigError("grid search supports algorithm = net or jda")
    src, tgt = load_data(cfg, cfg.seed)
    if tgt is None:
        raise ConfigError("grid search needs a [target] section")
    truth = tgt.labels
    blind = unlabeled(tgt)
    iterations = 10 if cfg.params is None else cfg.params.iterations
    result = grid_search(
        src.features, src.labels, blind.features, cfg.kernel, cfg.grid, cfg.kmm,
        algo=algo, fraction=cfg.fraction, iterations=iterations, y_target=truth,
    )
    out = _out_path(args, cfg, "grid.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=GRID_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in result.table:
            writer.writerow({c: "" if row.get(c) is None else row.get(c) for c in GRID_COLUMNS})
    selected = {
        "record": "selected",
        "algorithm": algo,
        "params": asdict(result.best) if result.best else None,
        "validation_accuracy": result.best_row["validation_accuracy"] if result.best_row else None,
        "target_accuracy": result.best_row.get("target_accuracy") if result.best_row else None,
        "n_validation": int(result.validation_idx.size),
        "kmm_objective": result.weights.objective,
        "kmm_feasible": result.weights.feasible,
    }
    oracle = result.oracle_best()
    if oracle is not None:
        selected["oracle_target_accuracy"] = oracle["target_accuracy"]
        selected["oracle_cell"] = oracle["cell"]
    json_path = out.with_suffix(".jsonl")
    write_records(json_path, [{"record": "config", "seed": cfg.seed, "config": cfg.echo()}, selected])
    print(format_table(result.table, GRID_COLUMNS[:-1]))
    if result.best is None:
        print("no grid cell could be fit", file=sys.stderr)
        return 1
    b = result.best
    print(f"selected alpha={b.alpha} beta={b.beta} gamma={b.gamma} k={b.k}")
    return 0


def cmd_gen_toy(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    src, tgt = two_moon(args.n_per_class, args.noise, args.rotation, (args.dx, args.dy), args.seed or 0)
    save_csv(out / "source.csv", src)
    save_csv(out / "target.csv", tgt)
    print(f"wrote {out / 'source.csv'} and {out / 'target.csv'}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="netadapt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "fit one algorithm and write a JSONL report"),
        ("compare", "accuracy table over algorithms and seeds"),
        ("grid", "KMM-validated grid search"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output path")
        p.add_argument("--profile", choices=sorted(PROFILES), help="named parameter preset")
    p = sub.add_parser("gen-toy", help="write a two-moon source/target pair as CSV")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-per-class", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--rotation", type=float, default=30.0)
    p.add_argument("--dx", type=float, default=0.0)
    p.add_argument("--dy", type=float, default=0.0)
    p.add_argument("--profile", help=argparse.SUPPRESS)
    return parser


def _failing_module(exc):
    module = "netadapt"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        name = frame.f_globals.get("__name__", "")
        if name.startswith("netadapt"):
            module = name
    return module


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "gen-toy":
            return cmd_gen_toy(args)
        cfg = load_config(args.config, profile=args.profile, seed=args.seed)
        return {"run": cmd_run, "compare": cmd_compare, "grid": cmd_grid}[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NetAdaptError, np.linalg.LinAlgError, OSError, AssertionError) as exc:
        print(f"error in {_failing_module(exc)}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
