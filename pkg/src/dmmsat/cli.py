"""Command-line interface: generate, solve, bench, sweep, blocks-check.

Exit codes: 0 success, 1 usage error, 2 instance not solved under
--require-solved, 3 internal error.  Diagnostics go to stderr; data goes
to files or stdout.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .bench import BatchSpec, fit_power_law, run_batch, sweep_parameter
from .circuit import (BlockConstants, adder, antilog_amp, clause_module,
                      comparator3, log_amp, multiplier, parse_block_graph,
                      softmax_block, subtractor)
from .cnf import generate_planted, parse_dimacs, serialize_dimacs
from .dynamics import DmmParams
from .imperfections import ImperfectionModel
from .integrator import SolverConfig, solve

USAGE_ERROR, UNSOLVED, INTERNAL_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the CLI contract reserves 2 for
    # unsolved instances, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _build_parser():
    top = _Parser(prog="dmmsat", description=__doc__)
    top.add_argument("--version", action="version", version=f"dmmsat {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a planted 3-SAT instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--ratio", type=float, default=4.3)
    g.add_argument("--p0", type=float, default=0.08)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve a DIMACS instance")
    s.add_argument("cnf")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-steps", type=int, default=2_000_000)
    s.add_argument("--check-interval", type=int, default=1)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--zeta", type=float, default=None)
    s.add_argument("--eta-tol", type=float, default=None)
    s.add_argument("--kappa", type=float, default=None)
    s.add_argument("--white-noise", type=float, default=None)
    s.add_argument("--tol-mode", choices=("static_per_site", "resample_per_step"),
                   default=None)
    s.add_argument("--model-seed", type=int, default=None)
    s.add_argument("--trace", default=None, help="write a v-trajectory CSV")
    s.add_argument("--trace-every", type=int, default=10)
    s.add_argument("--require-solved", action="store_true")

    b = sub.add_parser("bench", help="run a scaling batch")
    b.add_argument("--sizes", type=int, nargs="+", required=True)
    b.add_argument("--ratio", type=float, default=4.3)
    b.add_argument("--p0", type=float, default=0.08)
    b.add_argument("--instances", type=int, default=100)
    b.add_argument("--step-cap", type=int, default=2_000_000)
    b.add_argument("--check-interval", type=int, default=10)
    b.add_argument("--base-seed", type=int, default=0)
    b.add_argument("--dt", type=float, default=None)
    b.add_argument("--zeta", type=float, default=None)
    b.add_argument("--eta-tol", type=float, default=None)
    b.add_argument("--kappa", type=float, default=None)
    b.add_argument("--white-noise", type=float, default=None)
    b.add_argument("--tol-mode", choices=("static_per_site", "resample_per_step"),
                   default=None)
    b.add_argument("--early-stop", action="store_true",
                   help="stop each size once the median-defining count solves")
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--out", required=True)

    w = sub.add_parser("sweep", help="sweep dt or zeta over a grid")
    w.add_argument("--param", choices=("dt", "zeta"), required=True)
    w.add_argument("--grid", type=float, nargs="+", required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--instances", type=int, default=100)
    w.add_argument("--step-cap", type=int, default=2_000_000)
    w.add_argument("--base-seed", type=int, default=0)
    w.add_argument("--workers", type=int, default=None)
    w.add_argument("--out", required=True)

    c = sub.add_parser("blocks-check", help="circuit block verification suites")
    c.add_argument("--graph", default=None,
                   help="evaluate a block-graph description instead")
    c.add_argument("--points", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    return top


def _model_from_flags(args, fallback_seed):
    flags = (args.eta_tol, args.kappa, args.white_noise, args.tol_mode)
    if all(f is None for f in flags):
        return None
    seed = args.model_seed if getattr(args, "model_seed", None) is not None \
        else fallback_seed
    return ImperfectionModel(
        eta_tol=args.eta_tol or 0.0,
        tol_mode=args.tol_mode or "static_per_site",
        kappa=args.kappa or 0.0,
        white_noise_level=args.white_noise or 0.0,
        seed=seed,
    )


def _cmd_gen(args):
    f, plant = generate_planted(args.n, args.ratio, p0=args.p0, seed=args.seed)
    bits = "".join("1" if b else "0" for b in plant.values)
    comments = (
        "generator planted-3sat",
        f"n {args.n} ratio {args.ratio} p0 {args.p0} seed {args.seed}",
        f"plant {bits}",
    )
    with open(args.out, "w") as fh:
        fh.write(serialize_dimacs(f, comments=comments))
    print(f"wrote {args.out}: n={f.n_vars} m={f.n_clauses}", file=sys.stderr)
    return 0


def _cmd_solve(args):
    with open(args.cnf) as fh:
        f = parse_dimacs(fh.read())
    model = _model_from_flags(args, args.seed)
    cfg = SolverConfig(max_steps=args.max_steps, dt_override=args.dt,
                       zeta_override=args.zeta,
                       check_interval=args.check_interval, seed=args.seed,
                       imperfections=model,
                       trace_every=args.trace_every if args.trace else 0)
    res = solve(f, cfg)
    print(json.dumps({"solved": res.solved, "steps": res.steps,
                      "integrated_time": res.integrated_time,
                      "seed": res.seed}))
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["time"] + [f"v{i+1}" for i in range(f.n_vars)])
            for t, vvec in res.trajectory_sample or ():
                wr.writerow([repr(t)] + [repr(x) for x in vvec])
    if args.require_solved and not res.solved:
        return UNSOLVED
    return 0


def _cmd_bench(args):
    model = _model_from_flags(args, args.base_seed)
    spec = BatchSpec(sizes=tuple(args.sizes), ratio=args.ratio,
                     instances_per_size=args.instances,
                     step_cap=args.step_cap, p0=args.p0,
                     base_seed=args.base_seed,
                     check_interval=args.check_interval,
                     dt_override=args.dt, zeta_override=args.zeta,
                     imperfections=model, early_stop=args.early_stop,
                     workers=args.workers)
    stats = run_batch(spec)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "instances", "solved", "median_time", "censored",
                     "dt", "zeta"])
        for sz in stats.sizes:
            wr.writerow([sz.n, sz.instances, sz.solved, repr(sz.median_time),
                         sz.censored, repr(sz.dt), repr(sz.zeta)])
    finite = [(sz.n, sz.median_time) for sz in stats.sizes
              if math.isfinite(sz.median_time)]
    summary = {"sizes": len(stats.sizes),
               "solved_total": sum(sz.solved for sz in stats.sizes)}
    if len(finite) >= 3:
        fit = fit_power_law(finite)
        summary["exponent"] = fit.exponent
        summary["exponent_stderr"] = fit.exponent_stderr
        summary["prefactor"] = fit.prefactor
    print(json.dumps(summary))
    return 0


def _cmd_sweep(args):
    res = sweep_parameter(args.param, args.grid, args.n, args.instances,
                          args.step_cap, base_seed=args.base_seed,
                          workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([args.param, "solved"])
        for g, cnt in zip(res.grid, res.counts):
            wr.writerow([repr(g), cnt])
    print(json.dumps({"param": res.param, "peak": res.peak, "flat": res.flat}))
    return 0


def _blocks_suite(points, seed):
    """Point-by-point block and clause-module comparisons."""
    rng = np.random.default_rng(seed)
    c = BlockConstants()
    rows = []

    def emit(suite, case, expected, actual):
        expected, actual = float(expected), float(actual)
        err = abs(actual - expected) / (abs(expected) + 1e-12)
        rows.append((suite, case, repr(expected), repr(actual), repr(err)))

    u = rng.uniform(-4.0, 4.0, (points, 2))
    for i, (a, b) in enumerate(u):
        emit("adder", i, min(max(a + b, -c.rail), c.rail), adder(a, b))
        emit("subtractor", i, min(max(a - b, -c.rail), c.rail), subtractor(a, b))
        emit("multiplier", i, min(max(a * b, -c.rail), c.rail), multiplier(a, b))
    cur = rng.uniform(0.01e-6, 100e-6, points)
    for i, iin in enumerate(cur):
        emit("log", i, -0.375 * math.log10(iin / 1e-6), log_amp(iin))
    vin = rng.uniform(-0.05, 0.2, points)
    for i, v in enumerate(vin):
        emit("antilog", i, 0.030 * math.exp(-v / 0.030), antilog_amp(v))
    for i in range(points):
        x = rng.uniform(-0.05, 0.05, 3)
        got = softmax_block(x)
        z = x / c.v_thermal
        ref = np.exp(z - z.max())
        ref = ref / ref.sum()
        emit("softmax", i, float(ref[0]), float(got[0]))
        vmax, *_ = comparator3(*x)
        emit("comparator", i, float(x.max()), vmax)

    p = DmmParams()
    for i in range(points):
        v = rng.uniform(0.0, 1.0, 3)
        xs = float(rng.uniform(0.0, 1.0))
        dxs, dxl, dv1, dv2 = clause_module(*v, xs)
        cm = 1.0 - v.max()
        emit("clause_dxs", i, p.beta * (xs + p.epsilon) * (cm - p.gamma), dxs)
        emit("clause_dxl", i, p.alpha * (cm - p.delta), dxl)
        best = v.max()
        for j in range(3):
            r = cm if v[j] >= best - p.tie_tol else 0.0
            emit("clause_dv1", f"{i}.{j}",
                 xs * cm + p.zeta * (1.0 - xs) * r, dv1[j])
            emit("clause_dv2", f"{i}.{j}", (1.0 - xs) * r, dv2[j])
    return rows


def _cmd_blocks_check(args):
    if args.graph:
        with open(args.graph) as fh:
            text = fh.read()
        # "eval" lines are a CLI-level extension on top of the graph format
        graph_text = "\n".join(
            ln for ln in text.splitlines()
            if not ln.split("#", 1)[0].strip().startswith("eval"))
        graph = parse_block_graph(graph_text)
        rows = []
        names = None
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line.startswith("eval"):
                continue
            ins = {}
            for tok in line.split()[1:]:
                k, _, val = tok.partition("=")
                ins[k] = float(val)
            out = graph.evaluate(**ins)
            if names is None:
                names = sorted(out)
            rows.append((ln, *(repr(out[k]) for k in names)))
        with open(args.out, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["line"] + (names or []))
            wr.writerows(rows)
        print(json.dumps({"graph": args.graph, "evals": len(rows)}))
        return 0
    rows = _blocks_suite(args.points, args.seed)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["suite", "case", "expected", "actual", "rel_err"])
        wr.writerows(rows)
    worst = max(float(r[4]) for r in rows)
    print(json.dumps({"cases": len(rows), "worst_rel_err": worst}))
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "sweep": _cmd_sweep,
    "blocks-check": _cmd_blocks_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"dmmsat: error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"dmmsat: internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
