"""Solve a small suite under increasing white-noise levels.

The proof-of-concept suite (10 variables, 43 clauses) is solved from 100
random seeds at each noise level; solve counts and median steps printed.
"""

import argparse
import statistics
import sys

from dmmsat import SolverConfig, generate_planted, solve
from dmmsat.imperfections import ImperfectionModel


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--max-steps", type=int, default=100_000)
    ap.add_argument("--zeta", type=float, default=3e-3)
    ap.add_argument("--levels", type=float, nargs="+", default=[0.0, 0.1, 0.2])
    args = ap.parse_args(argv)

    for level in args.levels:
        solved, steps = 0, []
        for seed in range(args.seeds):
            f, _ = generate_planted(args.n, 4.3, seed=seed)
            model = None
            if level > 0:
                model = ImperfectionModel(eta_tol=0.0, kappa=0.0,
                                          white_noise_level=level, seed=seed)
            res = solve(f, SolverConfig(max_steps=args.max_steps,
                                        zeta_override=args.zeta, seed=seed,
                                        imperfections=model))
            solved += res.solved
            if res.solved:
                steps.append(res.steps)
        med = statistics.median(steps) if steps else float("nan")
        print(f"noise {level:4.2f}: {solved}/{args.seeds} solved, "
              f"median {med:.0f} steps")
    return 0


if __name__ == "__main__":
    sys.exit(main())
