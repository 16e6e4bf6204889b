"""Continuous-time memory-dynamics 3-SAT solver and benchmark harness."""

__version__ = "0.1.0"

from .cnf import (
    Assignment,
    Clause,
    CnfFormula,
    Literal,
    brute_force_sat,
    evaluate,
    generate_planted,
    parse_dimacs,
    serialize_dimacs,
)
from .dynamics import Derivatives, DmmParams, DmmState, derivatives
from .imperfections import ImperfectionModel, ToleranceSites, leakage_only, perturbed_derivatives
from .integrator import RunResult, SolverConfig, default_dt, default_zeta, init_state, solve

__all__ = [
    "Assignment",
    "Clause",
    "CnfFormula",
    "Derivatives",
    "DmmParams",
    "DmmState",
    "ImperfectionModel",
    "Literal",
    "RunResult",
    "SolverConfig",
    "ToleranceSites",
    "brute_force_sat",
    "default_dt",
    "default_zeta",
    "derivatives",
    "evaluate",
    "generate_planted",
    "init_state",
    "leakage_only",
    "parse_dimacs",
    "perturbed_derivatives",
    "serialize_dimacs",
    "solve",
]
