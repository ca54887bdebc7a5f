"""Command-line interface: ``masdag {gen,fit,eval,bench,mas}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import GridError, parse_grid, run_bench
from .datagen import MODELS, NOISE_FAMILIES, SCALE_MODES, SF_DIRECTIONS
from .graph import is_acyclic
from .io import read_triplets, write_triplets
from .mas import exact_mas, greedy_mas
from .pipeline import DataError, eval_to_dir, fit_from_dir, gen_to_dir
from .solvers import METHODS, DivergenceError, FitConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("masdag")


class UsageError(Exception):
    pass


def _thresholds(text):
    try:
        values = sorted(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid threshold list: {text!r}")
    if not values or values[0] < 0:
        raise argparse.ArgumentTypeError("thresholds must be a non-empty list of nonnegative numbers")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="masdag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic linear-SEM dataset")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--model", choices=MODELS, default="er")
    g.add_argument("--noise", choices=NOISE_FAMILIES, default="gaussian")
    g.add_argument("--scale", choices=SCALE_MODES, default="ev")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--n-val", type=int, default=None, help="validation samples (default: --n)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sf-direction", choices=SF_DIRECTIONS, default="existing-to-new")
    g.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="learn a DAG from DIR/X_train.csv")
    f.add_argument("--method", choices=METHODS, default="proximas")
    f.add_argument("--lambda1", type=float, default=0.1)
    f.add_argument("--lambda2", type=float, default=20.0)
    f.add_argument("--iters", type=int, default=1000)
    f.add_argument("--time-budget", type=float, default=None, help="seconds")
    f.add_argument("--warmstart-frac", type=float, default=0.8)
    f.add_argument("--lr", type=float, default=1e-3)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--snapshot-every", type=int, default=None)
    f.add_argument("--data", required=True)
    f.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="score a weight matrix against the ground truth")
    e.add_argument("--weights", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--val", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--thresholds", type=_thresholds, default=None)

    b = sub.add_parser("bench", help="run gen/fit/eval over a parameter grid")
    b.add_argument("--grid", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--omit-timing", action="store_true",
                   help="leave wall_time_s empty so bench.csv is byte-reproducible")

    m = sub.add_parser("mas", help="project a weight matrix onto an acyclic subgraph")
    m.add_argument("--weights", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--d", type=int, default=None)
    m.add_argument("--exact", action="store_true", help="exhaustive search (d <= 9)")
    return parser


def cmd_gen(args):
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    try:
        truth, _, _ = gen_to_dir(args.out, args.d, args.k, args.model, args.noise, args.scale,
                                 args.n, args.seed, args.n_val, args.sf_direction)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"wrote {args.out}: d={args.d}, arcs={int(truth.mask_true.sum())}")


def cmd_fit(args):
    config = FitConfig(
        method=args.method, lambda1=args.lambda1, lambda2=args.lambda2, max_iterations=args.iters,
        time_budget=args.time_budget, warmstart_fraction=args.warmstart_frac,
        learning_rate=args.lr, seed=args.seed, snapshot_every=args.snapshot_every,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = fit_from_dir(args.data, args.out, config)
    print(f"best objective {result.best_objective:.6g} at iteration {result.best_iteration} "
          f"({result.total_iterations} iterations, {result.total_time:.2f}s)")


def cmd_eval(args):
    summary, acyclic = eval_to_dir(args.weights, args.truth, args.val, args.out, args.thresholds)
    print(f"average_precision={summary.average_precision:.6f} "
          f"gaussian_nll={summary.gaussian_nll:.6f} acyclic={str(acyclic).lower()}")


def cmd_bench(args):
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    path = Path(args.grid)
    if not path.is_file():
        raise DataError(f"missing grid file: {path}")
    try:
        grid = parse_grid(path.read_text(encoding="utf-8"))
    except GridError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    rows = run_bench(grid, args.out, jobs=args.jobs, omit_timing=args.omit_timing)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} runs, {failed} failed; wrote {Path(args.out) / 'bench.csv'}")


def cmd_mas(args):
    path = Path(args.weights)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    try:
        W = read_triplets(path, args.d)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if args.exact and W.shape[0] > 9:
        raise UsageError("--exact supports d <= 9")
    res = exact_mas(W) if args.exact else greedy_mas(W)
    write_triplets(args.out, res.projected)
    print(f"retained={res.retained_weight:.6g} removed={res.removed_weight:.6g} "
          f"acyclic={str(is_acyclic(res.projected != 0)).lower()}")


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "eval": cmd_eval, "bench": cmd_bench, "mas": cmd_mas}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad flags
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except DataError as exc:
        print(f"masdag: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"masdag: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
