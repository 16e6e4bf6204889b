"""Physical non-idealities: arithmetic tolerance, capacitor leakage, white noise.

Tolerance model. Every addition and multiplication in the derivative
evaluation gets its own multiplicative factor drawn from
Uniform(1-eta_tol, 1+eta_tol). The site map is fixed:

per-clause sites (index into ToleranceSites.clause_factors[m, :]):
    0 C        C = 1 - max(vt)
    1 XS_ADD   xs + eps
    2 XS_SUB   C - gamma
    3 XS_MUL1  beta * (xs+eps)
    4 XS_MUL2  (beta*(xs+eps)) * (C-gamma)
    5 XL_SUB   C - delta
    6 XL_MUL1  alpha * exp(-xl)
    7 XL_MUL2  (alpha*exp(-xl)) * (C-delta)

per-slot sites (ToleranceSites.slot_factors[m, j, :], one literal occurrence
per slot j):
    0 NEG   vt = 1 - v            (negated literals only)
    1 GQ    G = q*C               (polarity multiply)
    2 RQ    R = q*C               (only when the literal attains the max)
    3 WXS   w * xs
    4 EU    eta * (w*xs)
    5 T1G   (eta*w*xs) * G
    6 EW    eta * w
    7 ZP    zeta * (eta*w)
    8 OPZ   1 + zeta*eta*w        (addition)
    9 OXS   1 - xs                (subtraction)
   10 OT    (1+zeta*eta*w) * (1-xs)
   11 T2R   (...) * R
   12 PAIR  grad term + rigidity term
   13 ACC   accumulation into dv

The softmax internals (exp, normalization) carry no factors; the weight
applications are the WXS/EW sites. Comparator maxima, the leakage currents,
and the Euler update are not equation arithmetic and carry no factors either.

Leakage subtracts kappa times the state from every derivative (a parasitic
discharge toward 0). White noise perturbs gamma, delta, epsilon per step.

Static factors are drawn once per model from numpy's PCG64; per-step
resampling uses a splitmix64 counter hash keyed (seed, step, site) so results
never depend on evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from .cnf import CnfFormula
from .dynamics import Derivatives, DmmParams, DmmState

TOL_MODES = ("static_per_site", "resample_per_step")


@dataclass(frozen=True)
class ImperfectionModel:
    eta_tol: float = 0.0
    tol_mode: str = "static_per_site"
    kappa: float = 1e-3
    white_noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.eta_tol < 1:
            raise ValueError(f"eta_tol must be in [0,1), got {self.eta_tol}")
        if self.tol_mode not in TOL_MODES:
            raise ValueError(f"tol_mode must be one of {TOL_MODES}, got {self.tol_mode!r}")
        if not 0 <= self.kappa < 1:
            raise ValueError(f"kappa must be in [0,1), got {self.kappa}")
        if self.white_noise_level < 0:
            raise ValueError("white_noise_level must be >= 0")

    @property
    def is_clean(self) -> bool:
        return self.eta_tol == 0 and self.kappa == 0 and self.white_noise_level == 0


def leakage_only(kappa: float = 1e-3, seed: int = 0) -> ImperfectionModel:
    """Capacitor leakage with tolerance and noise disabled."""
    return ImperfectionModel(eta_tol=0.0, kappa=kappa, white_noise_level=0.0, seed=seed)


@dataclass(frozen=True)
class ToleranceSites:
    """Per-site multiplicative factors for one (model, formula) pair."""

    clause_factors: np.ndarray  # [M, N_CLAUSE_SITES]
    slot_factors: np.ndarray  # [M, 3, N_SLOT_SITES]


@lru_cache(maxsize=32)
def tolerance_sites(model: ImperfectionModel, f: CnfFormula) -> ToleranceSites:
    """Draw (and cache) the static site factors; ones in resample mode."""
    m = f.n_clauses
    if model.tol_mode == "static_per_site" and model.eta_tol > 0:
        rng = np.random.default_rng(model.seed)
        lo, hi = 1.0 - model.eta_tol, 1.0 + model.eta_tol
        fc = rng.uniform(lo, hi, size=(m, _kernels.N_CLAUSE_SITES))
        fs = rng.uniform(lo, hi, size=(m, 3, _kernels.N_SLOT_SITES))
    else:
        fc = np.ones((m, _kernels.N_CLAUSE_SITES))
        fs = np.ones((m, 3, _kernels.N_SLOT_SITES))
    fc.flags.writeable = False
    fs.flags.writeable = False
    return ToleranceSites(fc, fs)


def perturbed_derivatives(
    f: CnfFormula, s: DmmState, p: DmmParams, model: ImperfectionModel, step_index: int = 0
) -> Derivatives:
    """Vector field with tolerance factors applied, then leakage subtracted.

    White noise is a separate per-step channel (see perturb_params); the
    solver applies it internally keyed by step index.
    """
    if s.n_vars != f.n_vars or s.n_clauses != f.n_clauses:
        raise ValueError("state shape does not match formula")
    n, m = f.n_vars, f.n_clauses
    if m == 0:
        return Derivatives(np.zeros(n), np.zeros(0), np.zeros(0))
    sites = tolerance_sites(model, f)
    pk = f.packed
    vt = np.empty((m, 3))
    cmax = np.empty(m)
    cval = np.empty(m)
    ew = np.empty(m)
    wsum = np.empty(n)
    wslot = np.empty(3 * m)
    dv = np.empty(n)
    dxs = np.empty(m)
    dxl = np.empty(m)
    resample = 1 if (model.tol_mode == "resample_per_step" and model.eta_tol > 0) else 0
    _kernels.derivs_sites(
        s.v, s.xs, s.xl, pk.clause_vars, pk.clause_neg, pk.inc_ptr,
        pk.inc_clause, pk.slot_pos,
        p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.eta_gain, p.zeta,
        p.tie_tol, sites.clause_factors, sites.slot_factors, resample,
        model.eta_tol, model.seed, step_index, model.kappa,
        vt, cmax, cval, ew, wsum, wslot, dv, dxs, dxl,
    )
    return Derivatives(dv, dxs, dxl)


def perturb_params(p: DmmParams, level: float, step_rng: np.random.Generator) -> DmmParams:
    """White noise on the parameter-setting sources: gamma, delta, epsilon
    each multiplied by (1 + level*g), g standard normal, floored at 1e-6."""
    if level < 0:
        raise ValueError("level must be >= 0")
    if level == 0:
        return p
    g = step_rng.standard_normal(3)
    return replace(
        p,
        gamma=max(p.gamma * (1.0 + level * g[0]), 1e-6),
        delta=max(p.delta * (1.0 + level * g[1]), 1e-6),
        epsilon=max(p.epsilon * (1.0 + level * g[2]), 1e-6),
    )
