"""Batch experiment runner: instance suites, censored medians, scaling fits.

Runs are seeded from (base_seed, size, instance index) so any subset of
a batch can be reproduced in isolation and results do not depend on the
worker count or completion order.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit

from .cnf import generate_planted
from .imperfections import ImperfectionModel
from .integrator import SolverConfig, default_dt, default_zeta, solve

__all__ = [
    "BatchSpec",
    "BatchStats",
    "FitResult",
    "RunRecord",
    "SizeStats",
    "SweepResult",
    "censored_median",
    "fit_power_law",
    "run_batch",
    "sweep_parameter",
]

WORKERS_ENV = "DMMSAT_WORKERS"


@dataclass(frozen=True)
class BatchSpec:
    sizes: tuple
    ratio: float = 4.3
    instances_per_size: int = 100
    step_cap: int = 2_000_000
    p0: float = 0.08
    base_seed: int = 0
    check_interval: int = 10
    dt_override: float | None = None
    zeta_override: float | None = None
    imperfections: ImperfectionModel | None = None
    early_stop: bool = False
    workers: int | None = None

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        if self.instances_per_size < 1:
            raise ValueError("instances_per_size must be >= 1")


@dataclass(frozen=True)
class RunRecord:
    n: int
    index: int
    instance_seed: int
    run_seed: int
    solved: bool
    steps: int
    integrated_time: float


@dataclass(frozen=True)
class SizeStats:
    n: int
    instances: int
    solved: int
    median_time: float
    censored: bool
    dt: float
    zeta: float
    records: tuple


@dataclass(frozen=True)
class BatchStats:
    spec: BatchSpec
    sizes: tuple  # of SizeStats


@dataclass(frozen=True)
class FitResult:
    exponent: float
    prefactor: float
    exponent_stderr: float
    residuals: tuple


@dataclass(frozen=True)
class SweepResult:
    param: str
    grid: tuple
    counts: tuple
    peak: float
    flat: bool


def _run_seeds(base_seed: int, n: int, index: int):
    ss = np.random.SeedSequence([base_seed, n, index])
    st = ss.generate_state(2, np.uint64)
    return int(st[0] >> 1), int(st[1] >> 1)


def _run_one(task):
    (n, index, ratio, p0, base_seed, step_cap, check_interval,
     dt_override, zeta_override, model) = task
    instance_seed, run_seed = _run_seeds(base_seed, n, index)
    formula, _ = generate_planted(n, ratio, p0=p0, seed=instance_seed)
    if model is not None:
        model = replace(model, seed=run_seed ^ 0x5EED)
    cfg = SolverConfig(max_steps=step_cap, dt_override=dt_override,
                       zeta_override=zeta_override,
                       check_interval=check_interval, seed=run_seed,
                       imperfections=model)
    res = solve(formula, cfg)
    return RunRecord(n=n, index=index, instance_seed=instance_seed,
                     run_seed=run_seed, solved=res.solved, steps=res.steps,
                     integrated_time=res.integrated_time)


def _resolve_workers(spec: BatchSpec) -> int:
    if spec.workers is not None:
        return max(1, spec.workers)
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def censored_median(times, total: int, cap: float):
    """Median time with the uniform-model estimate under censoring.

    times are the solved runs' times (all <= cap) out of `total` runs.
    If at least half the runs solved, the k-th order statistic
    (k = ceil((total+1)/2)) is exact because every unsolved time exceeds
    the cap.  Otherwise the solved fraction pins a uniform CDF at the
    cap, giving median = (total / (2 k)) * cap, flagged as an estimate.
    With nothing solved there is no finite estimate.
    """
    times = sorted(times)
    if len(times) > total:
        raise ValueError("more solved times than total runs")
    if any(t > cap for t in times):
        raise ValueError("solved time exceeds the cap")
    k_med = math.ceil((total + 1) / 2)
    if len(times) >= k_med:
        return times[k_med - 1], False
    if not times:
        return math.inf, True
    return (total / (2 * len(times))) * cap, True


def _size_runs(spec: BatchSpec, n: int, pool):
    tasks = [(n, i, spec.ratio, spec.p0, spec.base_seed, spec.step_cap,
              spec.check_interval, spec.dt_override, spec.zeta_override,
              spec.imperfections)
             for i in range(spec.instances_per_size)]
    k_med = math.ceil((spec.instances_per_size + 1) / 2)
    if not spec.early_stop:
        if pool is None:
            return [_run_one(t) for t in tasks]
        return list(pool.map(_run_one, tasks, chunksize=1))

    # early stop: consume results in index order, halting at the first
    # prefix that contains the median-defining number of solved runs;
    # the prefix rule keeps output independent of worker scheduling
    records = []
    solved = 0
    if pool is None:
        for t in tasks:
            rec = _run_one(t)
            records.append(rec)
            solved += rec.solved
            if solved >= k_med:
                break
        return records
    futures = [pool.submit(_run_one, t) for t in tasks]
    try:
        for fut in futures:
            rec = fut.result()
            records.append(rec)
            solved += rec.solved
            if solved >= k_med:
                break
    finally:
        for fut in futures:
            fut.cancel()
    return records


def run_batch(spec: BatchSpec) -> BatchStats:
    """Run the full suite described by spec and summarize per size.

    Failures inside a worker propagate with the run's (size, index)
    context; partial results are not silently dropped.
    """
    workers = _resolve_workers(spec)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    stats = []
    try:
        for n in spec.sizes:
            dt = spec.dt_override if spec.dt_override is not None else default_dt(n)
            zeta = (spec.zeta_override if spec.zeta_override is not None
                    else default_zeta(n))
            try:
                records = _size_runs(spec, n, pool)
            except Exception as exc:
                raise RuntimeError(f"batch failed at n={n}: {exc}") from exc
            times = [r.integrated_time for r in records if r.solved]
            med, censored = censored_median(times, spec.instances_per_size,
                                            spec.step_cap * dt)
            stats.append(SizeStats(n=n, instances=spec.instances_per_size,
                                   solved=len(times), median_time=med,
                                   censored=censored, dt=dt, zeta=zeta,
                                   records=tuple(records)))
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)
    return BatchStats(spec=spec, sizes=tuple(stats))


def fit_power_law(points) -> FitResult:
    """Least-squares power law through (n, median) pairs in log-log space."""
    pts = [(float(n), float(y)) for n, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(n <= 0 or y <= 0 or not math.isfinite(y) for n, y in pts):
        raise ValueError("power-law fit requires positive finite data")
    x = np.log([n for n, _ in pts])
    y = np.log([m for _, m in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = len(pts) - 2
    if dof > 0:
        s2 = float(resid @ resid) / dof
        sxx = float(((x - x.mean()) ** 2).sum())
        stderr = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    else:
        stderr = math.inf
    return FitResult(exponent=float(slope), prefactor=float(math.exp(intercept)),
                     exponent_stderr=stderr, residuals=tuple(resid))


def _log_gaussian(logx, amp, mu, sigma):
    return amp * np.exp(-((logx - mu) ** 2) / (2.0 * sigma ** 2))


def sweep_parameter(param: str, grid, n: int, instances: int,
                    step_cap: int, base_seed: int = 0,
                    workers: int | None = None,
                    check_interval: int = 10) -> SweepResult:
    """Solve a suite at each grid value of dt or zeta; locate the peak.

    Counts are fitted with a Gaussian in log-parameter space; the fitted
    mean is returned as the optimum.  A degenerate fit (flat counts or
    no convergence) falls back to the argmax grid point.
    """
    if param not in ("dt", "zeta"):
        raise ValueError("param must be 'dt' or 'zeta'")
    grid = [float(g) for g in grid]
    if not grid or any(g <= 0 for g in grid) or sorted(grid) != grid:
        raise ValueError("grid must be sorted and positive")
    counts = []
    for g in grid:
        spec = BatchSpec(sizes=(n,), instances_per_size=instances,
                         step_cap=step_cap, base_seed=base_seed,
                         check_interval=check_interval,
                         dt_override=g if param == "dt" else None,
                         zeta_override=g if param == "zeta" else None,
                         workers=workers)
        counts.append(run_batch(spec).sizes[0].solved)
    logx = np.log(grid)
    ydata = np.asarray(counts, dtype=float)
    flat = bool(ydata.max() == ydata.min())
    peak = grid[int(np.argmax(ydata))]
    if not flat:
        p0 = (float(ydata.max()), float(logx[int(np.argmax(ydata))]),
              max(float(logx.std()), 1e-3))
        try:
            # TypeError: fewer grid points than fit parameters
            popt, _ = curve_fit(_log_gaussian, logx, ydata, p0=p0, maxfev=5000)
            mu = float(popt[1])
            if logx.min() - 1.0 <= mu <= logx.max() + 1.0:
                peak = math.exp(mu)
            else:
                flat = True
        except (RuntimeError, TypeError):
            flat = True
    return SweepResult(param=param, grid=tuple(grid), counts=tuple(counts),
                       peak=peak, flat=flat)
