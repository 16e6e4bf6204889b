"""Median time-to-solution scaling over instance size.

Runs a planted-instance suite per size at the default schedules, writes
the per-size summary CSV, and prints the fitted power-law exponent.
"""

import argparse
import csv
import sys

from dmmsat.bench import BatchSpec, fit_power_law, run_batch


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+",
                    default=[100, 200, 300, 500, 800])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--step-cap", type=int, default=2_000_000)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--early-stop", action="store_true")
    ap.add_argument("--out", default="scaling.csv")
    args = ap.parse_args(argv)

    spec = BatchSpec(sizes=tuple(args.sizes), instances_per_size=args.instances,
                     step_cap=args.step_cap, base_seed=args.base_seed,
                     workers=args.workers, early_stop=args.early_stop)
    stats = run_batch(spec)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "instances", "solved", "median_time", "censored",
                     "dt", "zeta"])
        for sz in stats.sizes:
            wr.writerow([sz.n, sz.instances, sz.solved, repr(sz.median_time),
                         sz.censored, repr(sz.dt), repr(sz.zeta)])
            print(f"n={sz.n:5d}  solved {sz.solved}/{sz.instances}  "
                  f"median {sz.median_time:.1f}"
                  f"{' (censored estimate)' if sz.censored else ''}")
    import math
    pts = [(sz.n, sz.median_time) for sz in stats.sizes
           if math.isfinite(sz.median_time)]
    if len(pts) >= 3:
        fit = fit_power_law(pts)
        print(f"exponent {fit.exponent:.3f} +- {fit.exponent_stderr:.3f}  "
              f"prefactor {fit.prefactor:.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
