"""Sweep the step size and rigidity weight around their schedule values.

Solve-count profiles over a log grid, with the fitted optimum printed
next to the schedule prediction for the chosen size.
"""

import argparse
import sys

from dmmsat.bench import sweep_parameter
from dmmsat.integrator import default_dt, default_zeta


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--step-cap", type=int, default=30_000)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)

    dt_pred = default_dt(args.n)
    zeta_pred = default_zeta(args.n)
    dt_grid = tuple(round(dt_pred * f, 6) for f in (0.25, 0.4, 0.63, 1.0, 1.6, 2.5))
    zeta_grid = tuple(zeta_pred * f for f in (0.1, 0.25, 0.63, 1.0, 1.6, 4.0, 10.0))

    for param, grid, pred in (("dt", dt_grid, dt_pred),
                              ("zeta", zeta_grid, zeta_pred)):
        res = sweep_parameter(param, grid, args.n, args.instances,
                              args.step_cap, base_seed=args.base_seed,
                              workers=args.workers)
        print(f"{param}: schedule predicts {pred:.4g}")
        for g, cnt in zip(res.grid, res.counts):
            print(f"  {g:.4g}: {cnt}/{args.instances}")
        tag = " (argmax fallback)" if res.flat else ""
        print(f"  fitted peak {res.peak:.4g}{tag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
