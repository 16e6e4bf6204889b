"""The memory-augmented vector field, evaluated as a pure function of state.

Per unsatisfied clause the field combines a gradient-like push on every
member literal with a rigidity hold on the literal closest to satisfying the
clause; per-clause short-term memory xs alternates influence between the two,
and per-clause long-term memory xl weights clause difficulty through a
per-variable softmax over the variable's incident clauses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cnf import Clause, CnfFormula


@dataclass(frozen=True)
class DmmParams:
    """Equation constants.

    zeta and dt come from the size-dependent schedules in `integrator`
    (solve() fills them in); the defaults here sit at the tuned values for
    problems near a thousand variables.
    """

    alpha: float = 5.0  # long-term memory rate
    beta: float = 20.0  # short-term memory rate
    gamma: float = 0.25  # short-term threshold
    delta: float = 0.05  # long-term threshold
    epsilon: float = 1e-3  # short-term floor
    eta_gain: float = 3000.0  # gradient gain
    zeta: float = 3e-3  # rigidity mixing
    lambda_shift: float = 0.1  # log-space shift (used by the circuit path)
    dt: float = 0.14  # integration step
    tie_tol: float = 1e-9  # rigidity max-attainment tolerance

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "epsilon",
                     "eta_gain", "zeta", "lambda_shift", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0,1), got {self.gamma}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0,1), got {self.delta}")
        if self.epsilon >= 1:
            raise ValueError(f"epsilon must be << 1, got {self.epsilon}")
        if self.tie_tol < 0:
            raise ValueError("tie_tol must be >= 0")


def _frozen(arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DmmState:
    """Full system state: v in [0,1]^N, xs in [0,1]^M, xl in [0,M]^M."""

    v: np.ndarray
    xs: np.ndarray
    xl: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _frozen(self.v))
        object.__setattr__(self, "xs", _frozen(self.xs))
        object.__setattr__(self, "xl", _frozen(self.xl))
        if self.xs.shape != self.xl.shape:
            raise ValueError("xs and xl must have the same length")
        m = self.xl.shape[0]
        if self.v.size and (self.v.min() < 0 or self.v.max() > 1):
            raise ValueError("v out of bounds [0,1]")
        if m and (self.xs.min() < 0 or self.xs.max() > 1):
            raise ValueError("xs out of bounds [0,1]")
        if m and (self.xl.min() < 0 or self.xl.max() > m):
            raise ValueError(f"xl out of bounds [0,{m}]")

    @property
    def n_vars(self) -> int:
        return self.v.shape[0]

    @property
    def n_clauses(self) -> int:
        return self.xs.shape[0]


@dataclass(frozen=True)
class Derivatives:
    dv: np.ndarray
    dxs: np.ndarray
    dxl: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dv", _frozen(self.dv))
        object.__setattr__(self, "dxs", _frozen(self.dxs))
        object.__setattr__(self, "dxl", _frozen(self.dxl))
        for name in ("dv", "dxs", "dxl"):
            if not np.isfinite(getattr(self, name)).all():
                raise FloatingPointError(f"non-finite {name}")


def literal_value(v_i: float, negated: bool) -> float:
    """Literal voltage: v for a plain literal, 1-v for a negated one."""
    return 1.0 - v_i if negated else v_i


def clause_value(clause: Clause, v) -> float:
    """C = 1 - max over the clause's literal values; 0 means satisfied."""
    return 1.0 - max(literal_value(v[l.var - 1], l.negated) for l in clause.literals)


def _member(clause: Clause, n: int):
    for lit in clause.literals:
        if lit.var == n:
            return lit
    raise ValueError(f"variable {n} not in clause {[l.signed for l in clause.literals]}")


def gradient_term(clause: Clause, n: int, v) -> float:
    """G = q*C: push every member literal toward satisfying the clause."""
    lit = _member(clause, n)
    return lit.polarity * clause_value(clause, v)


def rigidity_term(clause: Clause, n: int, v, tie_tol: float = 1e-9) -> float:
    """R = q*C for literals attaining the clause max (within tie_tol), else 0."""
    lit = _member(clause, n)
    vals = [literal_value(v[l.var - 1], l.negated) for l in clause.literals]
    mine = literal_value(v[lit.var - 1], lit.negated)
    if mine < max(vals) - tie_tol:
        return 0.0
    return lit.polarity * (1.0 - max(vals))


def softmax_weights(xl_subset) -> np.ndarray:
    """Stable softmax: shift by the max before exponentiating."""
    z = np.asarray(xl_subset, dtype=np.float64)
    if z.size == 0:
        raise ValueError("softmax over an empty set")
    e = np.exp(z - z.max())
    return e / e.sum()


def derivatives(f: CnfFormula, s: DmmState, p: DmmParams) -> Derivatives:
    """Full vector field at state s.

    dxs_m = beta*(xs_m + eps)*(C_m - gamma)
    dxl_m = alpha*exp(-xl_m)*(C_m - delta)
    dv_n  = sum over clauses m containing n of
            eta*w_m^n*xs_m*G_nm + (1 + zeta*eta*w_m^n)*(1-xs_m)*R_nm
    with w^n the softmax of xl over n's incident clauses. Variables in no
    clause get dv = 0.
    """
    if s.n_vars != f.n_vars or s.n_clauses != f.n_clauses:
        raise ValueError(
            f"state shape ({s.n_vars},{s.n_clauses}) does not match "
            f"formula ({f.n_vars},{f.n_clauses})"
        )
    n, m = f.n_vars, f.n_clauses
    if m == 0:
        return Derivatives(np.zeros(n), np.zeros(0), np.zeros(0))
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
    _kernels.derivs_clean(
        s.v, s.xs, s.xl, pk.clause_vars, pk.clause_neg, pk.inc_ptr,
        pk.inc_clause, pk.slot_pos,
        p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.eta_gain, p.zeta,
        p.tie_tol, vt, cmax, cval, ew, wsum, wslot, dv, dxs, dxl,
    )
    return Derivatives(dv, dxs, dxl)
