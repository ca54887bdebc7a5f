"""Grid benchmarks: gen -> fit -> eval for every grid cell and repetition.

Grid files hold one ``key=value`` per line; list-valued keys take
comma-separated values. Blank lines and ``#`` comments are ignored::

    d=50,100
    k=1
    model=er
    noise=gaussian
    scale=ev
    n=1000
    method=proximas,optimas
    repetitions=3
    budget=2000
"""
import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .io import write_json
from .pipeline import _now, eval_to_dir, fit_from_dir, gen_to_dir
from .solvers import FitConfig

AXES = ("d", "k", "model", "noise", "scale", "n", "method")
BENCH_COLUMNS = AXES + ("repetition", "seed", "status", "average_precision", "gaussian_nll",
                        "best_objective", "iterations", "wall_time_s")

_AXIS_TYPES = {"d": int, "k": int, "model": str, "noise": str, "scale": str, "n": int, "method": str}
_SCALARS = {
    "repetitions": int,
    "budget": int,
    "time_budget": float,
    "seed": int,
    "lambda1": float,
    "lambda2": float,
    "warmstart_frac": float,
    "lr": float,
    "n_val": int,
}
_DEFAULTS = {
    "d": [50], "k": [1], "model": ["er"], "noise": ["gaussian"], "scale": ["ev"], "n": [1000],
    "method": ["proximas"], "repetitions": 1, "budget": 1000, "time_budget": None, "seed": 0,
    "lambda1": 0.1, "lambda2": 20.0, "warmstart_frac": 0.8, "lr": 1e-3, "n_val": None,
}


class GridError(ValueError):
    pass


def parse_grid(text):
    grid = dict(_DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GridError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _AXIS_TYPES:
                values = [_AXIS_TYPES[key](v.strip()) for v in value.split(",") if v.strip()]
                if not values:
                    raise GridError(f"line {lineno}: empty list for {key}")
                grid[key] = values
            elif key in _SCALARS:
                grid[key] = _SCALARS[key](value)
            else:
                raise GridError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, GridError):
                raise
            raise GridError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if grid["repetitions"] < 1:
        raise GridError("repetitions must be >= 1")
    return grid


@dataclass(frozen=True)
class Cell:
    d: int
    k: int
    model: str
    noise: str
    scale: str
    n: int
    method: str
    repetition: int
    seed: int

    @property
    def name(self):
        return (f"d{self.d}_k{self.k}_{self.model}_{self.noise}_{self.scale}_n{self.n}"
                f"_{self.method}_r{self.repetition}")


def cells(grid):
    out = []
    for combo in itertools.product(*(grid[a] for a in AXES)):
        for rep in range(grid["repetitions"]):
            out.append(Cell(*combo, repetition=rep, seed=grid["seed"] + rep))
    return out


def run_cell(cell, grid, out):
    """Run one cell; failures are reported in the status field."""
    cell_dir = Path(out) / cell.name
    row = {c: getattr(cell, c) for c in AXES + ("repetition", "seed")}
    try:
        data_dir = cell_dir / "data"
        gen_to_dir(data_dir, cell.d, cell.k, cell.model, cell.noise, cell.scale, cell.n,
                   seed=cell.seed, n_val=grid["n_val"])
        config = FitConfig(
            method=cell.method, lambda1=grid["lambda1"], lambda2=grid["lambda2"],
            max_iterations=grid["budget"], time_budget=grid["time_budget"],
            warmstart_fraction=grid["warmstart_frac"], learning_rate=grid["lr"], seed=cell.seed,
        )
        result = fit_from_dir(data_dir, cell_dir / "fit", config)
        summary, _ = eval_to_dir(cell_dir / "fit" / "W_best.csv", data_dir / "W_true.csv",
                                 data_dir / "X_val.csv", cell_dir / "eval")
        row.update(status="ok", average_precision=summary.average_precision,
                   gaussian_nll=summary.gaussian_nll, best_objective=result.best_objective,
                   iterations=result.total_iterations, wall_time_s=result.total_time)
    except Exception as exc:  # recorded per cell, the batch continues
        msg = " ".join(f"{type(exc).__name__}: {exc}".split())
        row.update(status=f"error: {msg}")
    return row


def _run_cell_args(args):
    return run_cell(*args)


def _cell_key(cell):
    return tuple(getattr(cell, a) for a in AXES) + (cell.repetition,)


def run_bench(grid, out, jobs=1, omit_timing=False):
    """Run every cell and write ``bench.csv``; returns the rows in grid order."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    todo = sorted(cells(grid), key=_cell_key)
    args = [(c, grid, out) for c in todo]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell_args, args))
    else:
        rows = [run_cell(*a) for a in args]
    if omit_timing:
        for r in rows:
            r["wall_time_s"] = None
    with open(out / "bench.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        for r in rows:
            writer.writerow([_cell_value(r.get(c)) for c in BENCH_COLUMNS])
    write_json(out / "manifest.json", {
        "tool": "masdag", "tool_version": __version__, "grid": grid,
        "cells": len(rows), "started": started, "finished": _now(),
    })
    return rows


def _cell_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    return v
