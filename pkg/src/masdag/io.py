"""CSV readers/writers shared by the solvers and the CLI.

Weight matrices are stored as ``i,j,weight`` triplets of the nonzero
entries (0-based, row-major, 17 significant digits). Sample matrices are
stored as plain rows of comma-separated values.
"""
import csv
import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % x


def write_triplets(path, W):
    W = np.asarray(W)
    rows, cols = np.nonzero(W)  # row-major
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("i,j,weight\n")
        for i, j in zip(rows, cols):
            fh.write(f"{i},{j},{_fmt(float(W[i, j]))}\n")


def write_mask(path, mask):
    write_triplets(path, np.asarray(mask, dtype=bool).astype(np.float64))


def read_triplets(path, d=None):
    """Read a triplet file into a dense matrix; ``d`` defaults to max index + 1."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["i", "j", "weight"]:
            raise ValueError(f"{path}: expected header 'i,j,weight'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            entries.append((int(row[0]), int(row[1]), float(row[2])))
    size = max((max(i, j) for i, j, _ in entries), default=-1) + 1
    if d is None:
        d = size
    elif size > d:
        raise ValueError(f"{path}: index {size - 1} out of range for d={d}")
    W = np.zeros((d, d))
    for i, j, w in entries:
        if i < 0 or j < 0:
            raise ValueError(f"{path}: negative index")
        W[i, j] = w
    return W


def write_samples(path, X):
    np.savetxt(path, np.asarray(X, dtype=np.float64), fmt=FLOAT_FMT, delimiter=",")


def read_samples(path):
    X = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    if X.size == 0:
        raise ValueError(f"{path}: no samples")
    return X


def write_trace(path, history):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("iteration,wall_time_s,objective,acyclic\n")
        for s in history:
            fh.write(f"{s.iteration},{_fmt(s.wall_time)},{_fmt(s.objective)},{str(s.acyclic).lower()}\n")


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
                          encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
