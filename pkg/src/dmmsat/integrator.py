"""Clamped forward-Euler integration, solution detection, parameter schedules.

The update is s' = clamp(s + dt * D(s)): an out-of-range push is simply not
realized, mirroring the bound-enforcing switches of the hardware picture.
Solution detection thresholds v > 0.5 and checks the formula every
check_interval steps (and at step 0, and at the cap).

Randomness: initial v is i.i.d. Uniform(0,1) from numpy's PCG64 (default_rng)
seeded per run; memories start at 0. The seed is recorded in the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .cnf import Assignment, CnfFormula, evaluate
from .dynamics import DmmParams, DmmState, derivatives
from .imperfections import ImperfectionModel, perturbed_derivatives, tolerance_sites

DT_COEF = 0.230
DT_EXP = -0.069
ZETA_A = 6.83
ZETA_B = -1.10
ZETA_C = -6.53


def default_dt(n: int | float) -> float:
    """Tuned integration step vs problem size: 0.230 * n^-0.069."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return DT_COEF * float(n) ** DT_EXP


def default_zeta(n: int | float) -> float:
    """Tuned rigidity mixing vs size: exp(6.83 * (ln n)^-1.10 - 6.53)."""
    if n < 2:
        raise ValueError(f"need n >= 2 (ln n > 0), got {n}")
    return math.exp(ZETA_A * math.log(n) ** ZETA_B + ZETA_C)


def time_scale_seconds(units: float) -> float:
    """Projected hardware seconds: one second is about 100 time units."""
    if units < 0:
        raise ValueError("units must be >= 0")
    return units / 100.0


@dataclass(frozen=True)
class SolverConfig:
    max_steps: int = 2_000_000
    dt_override: float | None = None
    zeta_override: float | None = None
    check_interval: int = 1
    seed: int = 0
    imperfections: ImperfectionModel | None = None
    trace_every: int = 0  # 0 disables trajectory sampling
    params: DmmParams | None = None  # equation constants; dt/zeta still come
    # from the overrides or the schedules

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if self.trace_every < 0:
            raise ValueError("trace_every must be >= 0")


@dataclass(frozen=True)
class RunResult:
    solved: bool
    steps: int
    integrated_time: float
    assignment: Assignment | None
    seed: int
    trajectory_sample: tuple[tuple[float, tuple[float, ...]], ...] | None = None


def init_state(f: CnfFormula, seed: int) -> DmmState:
    """v ~ Uniform(0,1) i.i.d., memories at 0; deterministic per seed."""
    rng = np.random.default_rng(seed)
    m = f.n_clauses
    return DmmState(rng.random(f.n_vars), np.zeros(m), np.zeros(m))


def step(
    f: CnfFormula,
    s: DmmState,
    p: DmmParams,
    model: ImperfectionModel | None = None,
    step_index: int = 0,
) -> DmmState:
    """One clamped Euler step; NaN in the derivatives raises."""
    if model is None:
        d = derivatives(f, s, p)
    else:
        d = perturbed_derivatives(f, s, p, model, step_index)
    # Derivatives validates finiteness on construction
    m = s.n_clauses
    v = np.clip(s.v + p.dt * d.dv, 0.0, 1.0)
    xs = np.clip(s.xs + p.dt * d.dxs, 0.0, 1.0)
    xl = np.clip(s.xl + p.dt * d.dxl, 0.0, float(m))
    return DmmState(v, xs, xl)


def _resolved_params(f: CnfFormula, config: SolverConfig) -> DmmParams:
    base = config.params if config.params is not None else DmmParams()
    dt = config.dt_override if config.dt_override is not None else default_dt(f.n_vars)
    zeta = config.zeta_override if config.zeta_override is not None else default_zeta(f.n_vars)
    return replace(base, dt=dt, zeta=zeta)


def solve(f: CnfFormula, config: SolverConfig | None = None) -> RunResult:
    """Integrate until the thresholded assignment satisfies f or the cap hits.

    solved=True results carry an assignment re-verified by the independent
    evaluator; a NaN in the derivatives raises FloatingPointError.
    """
    if config is None:
        config = SolverConfig()
    p = _resolved_params(f, config)
    state = init_state(f, config.seed)
    n, m = f.n_vars, f.n_clauses
    if m == 0:
        a = Assignment.from_array(state.v > 0.5)
        return RunResult(True, 0, 0.0, a, config.seed, None)
    v = state.v.copy()
    xs = state.xs.copy()
    xl = state.xl.copy()
    pk = f.packed

    trace_every = config.trace_every
    if trace_every > 0:
        cap = config.max_steps // trace_every + 2
        trace_t = np.empty(cap)
        trace_v = np.empty((cap, n))
    else:
        trace_t = np.empty(0)
        trace_v = np.empty((0, n))

    model = config.imperfections
    if model is None:
        status, steps, ntr = _kernels.run_clean(
            v, xs, xl, pk.clause_vars, pk.clause_neg, pk.inc_ptr,
            pk.inc_clause, pk.slot_pos,
            p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.eta_gain,
            p.zeta, p.tie_tol, p.dt,
            config.max_steps, config.check_interval, trace_every,
            trace_t, trace_v,
        )
    else:
        sites = tolerance_sites(model, f)
        resample = 1 if (model.tol_mode == "resample_per_step" and model.eta_tol > 0) else 0
        status, steps, ntr = _kernels.run_sites(
            v, xs, xl, pk.clause_vars, pk.clause_neg, pk.inc_ptr,
            pk.inc_clause, pk.slot_pos,
            p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.eta_gain,
            p.zeta, p.tie_tol, p.dt,
            sites.clause_factors, sites.slot_factors, resample,
            model.eta_tol, model.seed, model.kappa, model.white_noise_level,
            config.max_steps, config.check_interval, trace_every,
            trace_t, trace_v,
        )
    if status == _kernels.STATUS_NAN:
        raise FloatingPointError(
            f"NaN in derivatives at step {steps}; check imperfection/parameter settings"
        )
    solved = status == _kernels.STATUS_SOLVED
    assignment = None
    if solved:
        assignment = Assignment.from_array(v > 0.5)
        ok, unsat = evaluate(f, assignment)
        if not ok:
            raise RuntimeError(
                f"internal error: solver reported SAT but {unsat} clauses are unsatisfied"
            )
    trajectory = None
    if trace_every > 0:
        trajectory = tuple(
            (float(trace_t[i]), tuple(float(x) for x in trace_v[i]))
            for i in range(ntr)
        )
    return RunResult(solved, int(steps), float(steps * p.dt), assignment, config.seed, trajectory)
