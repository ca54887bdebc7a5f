"""Average-precision distribution on the d=100 ER1 Gaussian-EV benchmark.

Prints mean, std and mean - 2*std over seeds for both methods; the recovery
bar in tests/test_acceptance.py was frozen from this output.

    python scripts/calibrate_recovery.py --seeds 10
"""
import argparse

import numpy as np

from masdag import FitConfig, GraphSpec, average_precision, fit, generate


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--iters", type=int, default=5000)
    parser.add_argument("--warmstart-frac", type=float, default=0.8)
    args = parser.parse_args()

    for method in ("proximas", "optimas"):
        aps = []
        for seed in range(args.seeds):
            truth, _, train, _ = generate(GraphSpec(100, 1, "er"), "gaussian", "ev", n=1000, seed=seed)
            cfg = FitConfig(method=method, max_iterations=args.iters,
                            warmstart_fraction=args.warmstart_frac, seed=seed)
            res = fit(train, cfg)
            aps.append(average_precision(res.best, truth.mask_true))
        aps = np.array(aps)
        print(f"{method}: mean={aps.mean():.4f} std={aps.std(ddof=1):.4f} "
              f"bar={aps.mean() - 2 * aps.std(ddof=1):.4f} min={aps.min():.4f} "
              f"aps={np.round(aps, 4).tolist()}")


if __name__ == "__main__":
    main()
