"""Compare the two column-update backends along a full penalty path.

For each problem size, runs the warm-started path once per backend and prints
sweeps, wall time, and the worst entrywise disagreement between the two
solution paths (which should sit far below the support threshold).

    python3 scripts/backend_shootout.py --sizes 50 100 200
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from glassokit.datagen import (
    gen_sparse_precision,
    lambda_grid,
    lambda_max,
    sample_gaussian,
)
from glassokit.evaluation import path_solve, shd
from glassokit.solver import BACKENDS


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outer-tol", type=float, default=1e-8)
    ap.add_argument("--inner-tol", type=float, default=1e-10)
    args = ap.parse_args(argv)

    print(f"{'p':>6} {'backend':>10} {'sweeps':>7} {'seconds':>8} "
          f"{'max |diff|':>11} {'max SHD':>8}")
    for p in args.sizes:
        gt = gen_sparse_precision(p, zero_fraction=0.7, seed=args.seed)
        ds = sample_gaussian(gt, 2 * p, seed=args.seed + 100)
        grid = lambda_grid(lambda_max(ds.S))
        paths = {}
        for backend in BACKENDS:
            t0 = time.perf_counter()
            paths[backend] = path_solve(
                ds.S, grid, start="warm", backend=backend,
                outer_tol=args.outer_tol, inner_tol=args.inner_tol,
            )
            dt = time.perf_counter() - t0
            print(f"{p:>6} {backend:>10} {paths[backend].total_sweeps:>7} "
                  f"{dt:>8.2f}", flush=True)
        a, b = (paths[name].entries for name in BACKENDS)
        gap = max(float(np.max(np.abs(ea.theta - eb.theta)))
                  for ea, eb in zip(a, b))
        worst_shd = max(shd(ea.edges, eb.edges) for ea, eb in zip(a, b))
        print(f"{p:>6} {'agree':>10} {'':>7} {'':>8} {gap:>11.2e} "
              f"{worst_shd:>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
