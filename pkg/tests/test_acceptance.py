"""Acceptance suite: the headline behaviors, end to end, at full scale.

One test per criterion; each prints a single `criterion N: PASS/FAIL`
line on the real stderr (visible live even under capture, since several
of these run for a long time). The scaling batches are session fixtures
shared between criteria.

Run order puts the minute-scale checks first; the three batch criteria
at the end together take hours of single-core compute.
"""

import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from dmmsat import (
    DmmParams,
    DmmState,
    ImperfectionModel,
    SolverConfig,
    default_dt,
    default_zeta,
    evaluate,
    generate_planted,
    solve,
)
from dmmsat.bench import BatchSpec, fit_power_law, run_batch, sweep_parameter
from dmmsat.circuit import (
    BlockConstants,
    adder,
    antilog_amp,
    bidirectional_switch,
    clause_module,
    comparator3,
    log_amp,
    multiplier,
    softmax_block,
    subtractor,
)
from dmmsat.cli import main as cli_main
from dmmsat.dynamics import derivatives


_CAPTURE = None
_VERDICT_LOG = Path(__file__).resolve().parents[1] / "acceptance_verdicts.log"


@pytest.fixture(autouse=True)
def _live_output(capfd):
    # several of these tests run for hours; _line uses this handle to
    # lift capture while it emits the verdict (disabling capture from a
    # fixture does not survive into the test body, so it is done at the
    # print site instead)
    global _CAPTURE
    _CAPTURE = capfd
    yield
    _CAPTURE = None


def _line(num, ok, detail):
    msg = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    with _CAPTURE.disabled():
        print(msg, file=sys.stderr, flush=True)
    with _VERDICT_LOG.open("a") as fh:
        fh.write(msg + "\n")
    assert ok, f"criterion {num}: {detail}"


# the rigidity-weight schedule is fit at large sizes; the tens-of-variables
# suites pin zeta at its large-size plateau value instead of extrapolating
SMALL_SUITE_ZETA = 3e-3


def _small_suite(noise_level, seeds=100, max_steps=100_000):
    solved = 0
    for seed in range(seeds):
        f, _ = generate_planted(10, 4.3, seed=seed)
        model = None
        if noise_level > 0:
            model = ImperfectionModel(eta_tol=0.0, kappa=0.0,
                                      white_noise_level=noise_level, seed=seed)
        res = solve(f, SolverConfig(max_steps=max_steps,
                                    zeta_override=SMALL_SUITE_ZETA,
                                    seed=seed, imperfections=model))
        if res.solved:
            ok, _ = evaluate(f, res.assignment)
            assert ok, f"unsound result at seed {seed}"
            solved += 1
    return solved


class TestCriterion01Soundness:
    def test_criterion_01(self):
        # 1000 runs over four sizes; every solved result must verify
        plans = ((10, 250, 100_000, SMALL_SUITE_ZETA),
                 (30, 250, 200_000, None),
                 (50, 250, 200_000, None),
                 (100, 250, 500_000, None))
        runs = solved = 0
        for n, count, cap, zeta in plans:
            for seed in range(count):
                f, _ = generate_planted(n, 4.3, seed=seed)
                res = solve(f, SolverConfig(max_steps=cap, zeta_override=zeta,
                                            check_interval=10, seed=seed))
                runs += 1
                if res.solved:
                    ok, unsat = evaluate(f, res.assignment)
                    if not ok:
                        _line(1, False,
                              f"n={n} seed={seed}: {unsat} clauses violated")
                    solved += 1
        _line(1, True, f"{runs} runs, {solved} solved, all verified")


class TestCriterion02ProofOfConcept:
    def test_criterion_02(self):
        solved = _small_suite(0.0)
        _line(2, solved >= 95, f"{solved}/100 within 1e5 steps (need >=95)")


class TestCriterion03NoiseRobustness:
    def test_criterion_03(self):
        s1 = _small_suite(0.1)
        s2 = _small_suite(0.2)
        ok = s1 >= 90 and s2 >= 90
        _line(3, ok, f"noise 0.1: {s1}/100, noise 0.2: {s2}/100 (need >=90)")


class TestCriterion07Schedules:
    def test_criterion_07(self):
        dt1000 = default_dt(1000)
        z1000 = default_zeta(1000)
        ok_vals = 0.135 <= dt1000 <= 0.15 and 2e-3 <= z1000 <= 5e-3
        if not ok_vals:
            _line(7, False, f"dt(1000)={dt1000:.4f}, zeta(1000)={z1000:.2e}")

        # The step cap is set near the schedule-point median so solve
        # counts are maximally sensitive to the swept parameter; a loose
        # cap lets every grid point solve ~all instances and the fitted
        # peak is noise.
        n, instances, cap = 200, 100, 3_000
        dt_pred = default_dt(n)
        zeta_pred = default_zeta(n)
        ratio = math.sqrt(2.0)
        dt_grid = tuple(dt_pred * ratio ** k for k in range(-3, 4))
        zr = 2.0
        zeta_grid = tuple(zeta_pred * zr ** k for k in range(-3, 4))

        dt_sweep = sweep_parameter("dt", dt_grid, n, instances, cap,
                                   base_seed=11)
        zeta_sweep = sweep_parameter("zeta", zeta_grid, n, instances, cap,
                                     base_seed=11)
        ok_dt = (not dt_sweep.flat
                 and dt_pred / ratio <= dt_sweep.peak <= dt_pred * ratio)
        ok_zeta = (not zeta_sweep.flat
                   and zeta_pred / zr <= zeta_sweep.peak <= zeta_pred * zr)
        detail = (f"dt(1000)={dt1000:.4f}, zeta(1000)={z1000:.2e}; "
                  f"dt peak {dt_sweep.peak:.4f} vs {dt_pred:.4f} "
                  f"(counts {dt_sweep.counts}), "
                  f"zeta peak {zeta_sweep.peak:.2e} vs {zeta_pred:.2e} "
                  f"(counts {zeta_sweep.counts})")
        _line(7, ok_vals and ok_dt and ok_zeta, detail)


class TestCriterion08CircuitOracle:
    def test_criterion_08(self):
        rng = np.random.default_rng(0)
        c = BlockConstants()
        worst_block = 0.0

        def check(expected, actual):
            nonlocal worst_block
            err = abs(actual - expected) / max(abs(expected), 1e-300)
            worst_block = max(worst_block, err)

        u = rng.uniform(-4.0, 4.0, (1000, 2))
        clip = lambda x: min(max(x, -c.rail), c.rail)
        for a, b in u:
            check(clip(a + b), adder(a, b))
            check(clip(a - b), subtractor(a, b))
            check(clip(a * b), multiplier(a, b))
        for i in rng.uniform(0.01e-6, 100e-6, 1000):
            check(-0.375 * math.log10(i / 1e-6), log_amp(i))
        for v in rng.uniform(-0.05, 0.2, 1000):
            check(0.030 * math.exp(-v / 0.030), antilog_amp(v))
        for _ in range(1000):
            x = rng.uniform(-0.1, 0.1, 3)
            got = softmax_block(x)
            z = np.exp(x / c.v_thermal - (x / c.v_thermal).max())
            ref = z / z.sum()
            for g, r in zip(got, ref):
                check(r, g)
            vmax, b1, b2, b3 = comparator3(*x)
            check(x.max(), vmax)
            for xi, bi in zip(x, (b1, b2, b3)):
                want = x.max() + c.v_diode if xi >= x.max() - 1e-9 else -c.rail
                check(want, bi)
            v_in = float(rng.uniform(-2, 2))
            want = v_in if b1 > 0 else 0.0
            check(want, bidirectional_switch(v_in, b1, b1))
        if worst_block > 1e-12:
            _line(8, False, f"block worst rel err {worst_block:.2e}")

        # composed clause module vs the dynamics field, single positive
        # clause so each softmax weight is exactly 1; includes the
        # log-channel realization of dxl vs the direct exponential form
        from dmmsat.cnf import Clause, CnfFormula
        f = CnfFormula(3, (Clause.from_signed(1, 2, 3),))
        p = DmmParams()
        worst = 0.0
        for _ in range(10_000):
            v = rng.uniform(0.0, 1.0, 3)
            xs = float(rng.uniform(0.0, 1.0))
            xl = float(rng.uniform(0.0, 1.0))
            d = derivatives(f, DmmState(v, np.array([xs]), np.array([xl])), p)
            dxs, dxl, dv1, dv2 = clause_module(*v, xs, xl=xl)
            pairs = [(dxs, d.dxs[0]), (dxl, d.dxl[0])]
            for j in range(3):
                pairs.append((p.eta_gain * dv1[j] + dv2[j], d.dv[j]))
            for got, want in pairs:
                err = abs(got - want)
                if err > 1e-6:
                    err = err / abs(want)
                    worst = max(worst, err)
        ok = worst <= 1e-3
        _line(8, ok, f"blocks worst rel {worst_block:.2e} (<=1e-12); "
                     f"clause module worst {worst:.2e} (<=1e-3 rel/1e-6 abs) "
                     f"on 1e4 points")


class TestCriterion09FixedPoint:
    def test_criterion_09(self):
        rng = np.random.default_rng(1)
        checked = 0
        for trial in range(300):
            n = int(rng.integers(5, 40))
            f, plant = generate_planted(n, 4.3, seed=trial)
            # pin one plant-satisfying literal per clause at its corner,
            # randomize every other variable: every clause keeps a
            # literal at exactly 1
            v = rng.uniform(0.0, 1.0, n)
            corner = plant.as_array().astype(float)
            for cl in f.clauses:
                for lit in cl.literals:
                    idx = lit.var - 1
                    if corner[idx] == (0.0 if lit.negated else 1.0):
                        v[idx] = corner[idx]
                        break
            m = f.n_clauses
            s = DmmState(v, rng.uniform(0.0, 1.0, m), rng.uniform(0.0, m, m))
            d = derivatives(f, s, DmmParams())
            if not (np.all(d.dv == 0.0) and np.all(d.dxs < 0.0)
                    and np.all(d.dxl < 0.0)):
                _line(9, False,
                      f"trial {trial}: max|dv|={np.abs(d.dv).max():.2e}, "
                      f"max dxs={d.dxs.max():.2e}, max dxl={d.dxl.max():.2e}")
            checked += 1
        _line(9, True, f"{checked} satisfied configurations: dv==0, "
                        "dxs<0, dxl<0")


class TestCriterion10Determinism:
    def test_criterion_10(self, tmp_path):
        outs = []
        for tag, workers in (("a", "1"), ("b", "4")):
            out = tmp_path / f"{tag}.csv"
            code = cli_main(["bench", "--sizes", "10", "20",
                             "--instances", "10", "--step-cap", "100000",
                             "--zeta", "3e-3", "--base-seed", "5",
                             "--workers", workers, "--out", str(out)])
            assert code == 0
            outs.append(out.read_bytes())
        same = outs[0] == outs[1]
        # same check under the early-stop policy, where scheduling overlap
        # is the dangerous case
        outs2 = []
        for tag, workers in (("c", "1"), ("d", "4")):
            out = tmp_path / f"{tag}.csv"
            code = cli_main(["bench", "--sizes", "15", "--instances", "9",
                             "--step-cap", "100000", "--zeta", "3e-3",
                             "--base-seed", "5", "--early-stop",
                             "--workers", workers, "--out", str(out)])
            assert code == 0
            outs2.append(out.read_bytes())
        same2 = outs2[0] == outs2[1]
        _line(10, same and same2,
              f"byte-identical CSVs across 1 vs 4 workers "
              f"(run-all: {same}, early-stop: {same2})")


# ---------------------------------------------------------------------------
# batch criteria (hours)

SCALING_SIZES = (100, 200, 300, 500, 800)
IMPERFECT_SIZES = (100, 200, 300, 500)


@pytest.fixture(scope="session")
def clean_batch():
    spec = BatchSpec(sizes=SCALING_SIZES, instances_per_size=100,
                     step_cap=2_000_000, base_seed=0, check_interval=10)
    return run_batch(spec)


class TestCriterion04ScalingExponent:
    def test_criterion_04(self, clean_batch):
        pts = []
        parts = []
        for sz in clean_batch.sizes:
            parts.append(f"n={sz.n}: {sz.solved}/100 med={sz.median_time:.0f}"
                         f"{'*' if sz.censored else ''}")
            pts.append((sz.n, sz.median_time))
        if any(not math.isfinite(t) for _, t in pts):
            _line(4, False, "; ".join(parts) + " (unfittable median)")
        fit = fit_power_law(pts)
        ok = 1.8 <= fit.exponent <= 2.8
        _line(4, ok, f"exponent {fit.exponent:.3f} +- {fit.exponent_stderr:.3f} "
                     f"(need [1.8, 2.8]); " + "; ".join(parts))


class TestCriterion05ImperfectionTolerance:
    def test_criterion_05(self, clean_batch):
        model = ImperfectionModel(eta_tol=0.01, kappa=1e-3)
        spec = BatchSpec(sizes=IMPERFECT_SIZES, instances_per_size=100,
                         step_cap=2_000_000, base_seed=0, check_interval=10,
                         imperfections=model)
        dirty = run_batch(spec)
        clean_med = {sz.n: sz.median_time for sz in clean_batch.sizes}
        parts = []
        ratios_ok = True
        pts = []
        for sz in dirty.sizes:
            ratio = sz.median_time / clean_med[sz.n]
            ratios_ok &= (1 / 2 < ratio < 2) and math.isfinite(sz.median_time)
            parts.append(f"n={sz.n}: x{ratio:.2f}")
            pts.append((sz.n, sz.median_time))
        fit = fit_power_law(pts)
        ok = ratios_ok and 1.8 <= fit.exponent <= 2.9
        _line(5, ok, f"median ratios {', '.join(parts)} (need within 2x); "
                     f"exponent {fit.exponent:.3f} (need [1.8, 2.9])")


class TestCriterion06HighNoise:
    def test_criterion_06(self):
        model = ImperfectionModel(eta_tol=0.2, kappa=0.0)
        spec = BatchSpec(sizes=(200,), instances_per_size=100,
                         step_cap=2_000_000, base_seed=0, check_interval=10,
                         imperfections=model)
        stats = run_batch(spec)
        sz = stats.sizes[0]
        ok = sz.solved >= 51
        _line(6, ok, f"eta_tol=0.2 at n=200: {sz.solved}/100 within 2e6 steps "
                     f"(need >=51)")
