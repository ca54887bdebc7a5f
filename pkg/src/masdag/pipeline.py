"""Directory-level gen / fit / eval steps used by the CLI and the benchmark runner."""
import datetime as _dt
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import GraphSpec, generate
from .graph import is_acyclic, threshold
from .io import (
    read_json,
    read_samples,
    read_triplets,
    write_json,
    write_samples,
    write_triplets,
)
from .metrics import METRIC_COLUMNS, default_thresholds, evaluate
from .objective import Dataset
from .solvers import FitConfig, fit

SUMMARY_COLUMNS = ("average_precision", "gaussian_nll", "best_objective", "iterations", "wall_time_s")


class DataError(Exception):
    """Missing or malformed input files."""


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _fmt(x):
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def gen_to_dir(out, d, k=1, model="er", noise="gaussian", scale="ev", n=1000, seed=0,
               n_val=None, sf_direction="existing-to-new"):
    """Write X_train.csv, X_val.csv, W_true.csv and meta.json into ``out``."""
    graph = GraphSpec(d=d, k=k, model=model, sf_direction=sf_direction)
    truth, noise_spec, train, val = generate(graph, noise, scale, n=n, seed=seed, n_val=n_val)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_samples(out / "X_train.csv", train.X)
    write_samples(out / "X_val.csv", val.X)
    write_triplets(out / "W_true.csv", truth.W_true)
    # no timestamps here: repeated invocations must give identical bytes
    meta = {
        "tool": "masdag",
        "tool_version": __version__,
        "graph": {"d": d, "k": k, "model": model, "sf_direction": sf_direction},
        "noise": {"family": noise, "scale_mode": scale, "scales": noise_spec.scales},
        "n_train": n,
        "n_val": val.n,
        "seed": seed,
        "val_seed": seed + 1,
        "n_arcs": int(truth.mask_true.sum()),
        "order_true": truth.order_true,
        "files": ["X_train.csv", "X_val.csv", "W_true.csv", "meta.json"],
    }
    write_json(out / "meta.json", meta)
    return truth, train, val


def _load_samples(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    try:
        return read_samples(path)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def _load_triplets(path, d):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    try:
        return read_triplets(path, d)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def fit_from_dir(data_dir, out, config, write_snapshots=True):
    """Fit on ``data_dir/X_train.csv``; write W_best.csv, trace.csv, snapshots and manifest.json."""
    data_dir = Path(data_dir)
    X = _load_samples(data_dir / "X_train.csv")
    data = Dataset.from_samples(X)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    result = fit(data, config, snapshot_dir=out if write_snapshots else None)
    write_triplets(out / "W_best.csv", result.best)
    data_meta = data_dir / "meta.json"
    manifest = {
        "tool": "masdag",
        "tool_version": __version__,
        "data_dir": str(data_dir),
        "data_meta": read_json(data_meta) if data_meta.is_file() else None,
        "n_train": data.n,
        "d": data.d,
        "fit_config": config.to_dict(),
        "seed": config.seed,
        "started": started,
        "finished": _now(),
        "best_objective": result.best_objective,
        "best_iteration": result.best_iteration,
        "iterations": result.total_iterations,
        "activated_at": result.activated_at,
        "wall_time_s": result.total_time,
        "outputs": ["W_best.csv", "trace.csv", "manifest.json"]
        + [f"snapshot_{s.iteration}.csv" for s in result.history],
    }
    write_json(out / "manifest.json", manifest)
    return result


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def eval_to_dir(weights, truth, val, out, thresholds=None, fit_manifest=None):
    """Compute metrics.csv and summary.csv; nothing is written unless every input loads."""
    X_val = _load_samples(val)
    d = X_val.shape[1]
    W = _load_triplets(weights, d)
    W_true = _load_triplets(truth, d)
    if W.shape != W_true.shape:
        raise DataError(f"shape mismatch: weights {W.shape} vs truth {W_true.shape}")
    if fit_manifest is None:
        candidate = Path(weights).parent / "manifest.json"
        fit_manifest = candidate if candidate.is_file() else None
    info = read_json(fit_manifest) if fit_manifest is not None else {}

    val_data = Dataset.from_samples(X_val)
    summary = evaluate(W, threshold(W_true, 0.0), val_data, thresholds or default_thresholds())

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # stage into a temp dir so a failure leaves no partial outputs
    tmp = Path(tempfile.mkdtemp(prefix=".eval-", dir=out.parent))
    try:
        _write_csv(tmp / "metrics.csv", ("threshold",) + METRIC_COLUMNS,
                   [[r.threshold] + [getattr(r, c) for c in METRIC_COLUMNS] for r in summary.rows])
        _write_csv(tmp / "summary.csv", SUMMARY_COLUMNS, [[
            summary.average_precision, summary.gaussian_nll,
            info.get("best_objective"), info.get("iterations"), info.get("wall_time_s"),
        ]])
        out.mkdir(parents=True, exist_ok=True)
        for name in ("metrics.csv", "summary.csv"):
            os.replace(tmp / name, out / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return summary, bool(is_acyclic(W != 0))

