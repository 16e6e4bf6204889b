"""Clean vs imperfect scaling comparison.

Repeats the scaling suite with component tolerance and capacitor leakage
switched on and reports the per-size median ratio against the clean run.
"""

import argparse
import math
import sys
from dataclasses import replace

from dmmsat.bench import BatchSpec, fit_power_law, run_batch
from dmmsat.imperfections import ImperfectionModel


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 300, 500])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--step-cap", type=int, default=2_000_000)
    ap.add_argument("--eta-tol", type=float, default=0.01)
    ap.add_argument("--kappa", type=float, default=1e-3)
    ap.add_argument("--tol-mode", default="static_per_site",
                    choices=("static_per_site", "resample_per_step"))
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)

    spec = BatchSpec(sizes=tuple(args.sizes), instances_per_size=args.instances,
                     step_cap=args.step_cap, base_seed=args.base_seed,
                     workers=args.workers)
    model = ImperfectionModel(eta_tol=args.eta_tol, tol_mode=args.tol_mode,
                              kappa=args.kappa)
    clean = run_batch(spec)
    dirty = run_batch(replace(spec, imperfections=model))

    print(f"{'n':>5} {'clean med':>12} {'imperfect med':>14} {'ratio':>7}")
    pts = []
    for c, d in zip(clean.sizes, dirty.sizes):
        ratio = d.median_time / c.median_time
        print(f"{c.n:>5} {c.median_time:>12.1f} {d.median_time:>14.1f} "
              f"{ratio:>7.2f}")
        if math.isfinite(d.median_time):
            pts.append((d.n, d.median_time))
    if len(pts) >= 3:
        fit = fit_power_law(pts)
        print(f"imperfect exponent {fit.exponent:.3f} +- {fit.exponent_stderr:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
