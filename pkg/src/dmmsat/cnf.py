"""3-SAT instances: DIMACS I/O, planted generation at the hardness peak, evaluation.

Formulas are immutable. Every clause has exactly three literals on pairwise
distinct variables; the numeric kernels rely on that shape, so it is enforced
at construction and at parse time.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class Literal:
    """A variable (1-based index) or its negation."""

    var: int
    negated: bool = False

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")

    @property
    def polarity(self) -> int:
        return -1 if self.negated else 1

    @property
    def signed(self) -> int:
        """Signed DIMACS form: -var when negated."""
        return -self.var if self.negated else self.var

    @classmethod
    def from_signed(cls, lit: int) -> Literal:
        if lit == 0:
            raise ValueError("0 is the DIMACS clause terminator, not a literal")
        return cls(abs(lit), lit < 0)


@dataclass(frozen=True)
class Clause:
    """Disjunction of exactly three literals on distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise ValueError(f"clause must have exactly 3 literals, got {len(self.literals)}")
        vars_ = [l.var for l in self.literals]
        if len(set(vars_)) != 3:
            raise ValueError(f"duplicate variable in clause {vars_}")

    @classmethod
    def from_signed(cls, *lits: int) -> Clause:
        return cls(tuple(Literal.from_signed(l) for l in lits))


@dataclass(frozen=True)
class CnfFormula:
    """A 3-CNF formula with N variables and M clauses."""

    n_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        for cl in self.clauses:
            for lit in cl.literals:
                if lit.var > self.n_vars:
                    raise ValueError(f"literal {lit.signed} out of range 1..{self.n_vars}")

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """For each variable (index var-1), the ordered clause indices containing it."""
        inc: list[list[int]] = [[] for _ in range(self.n_vars)]
        for m, cl in enumerate(self.clauses):
            for lit in cl.literals:
                inc[lit.var - 1].append(m)
        return tuple(tuple(ms) for ms in inc)

    @cached_property
    def packed(self) -> PackedFormula:
        """Array view used by the numeric kernels (cached per formula)."""
        m = self.n_clauses
        cv = np.empty((m, 3), dtype=np.int32)
        cn = np.empty((m, 3), dtype=np.uint8)
        for i, cl in enumerate(self.clauses):
            for j, lit in enumerate(cl.literals):
                cv[i, j] = lit.var - 1
                cn[i, j] = 1 if lit.negated else 0
        counts = np.zeros(self.n_vars, dtype=np.int32)
        for i in range(m):
            for j in range(3):
                counts[cv[i, j]] += 1
        ptr = np.zeros(self.n_vars + 1, dtype=np.int32)
        np.cumsum(counts, out=ptr[1:])
        inc_clause = np.empty(3 * m, dtype=np.int32)
        inc_slot = np.empty(3 * m, dtype=np.int32)
        slot_pos = np.empty((m, 3), dtype=np.int32)
        fill = ptr[:-1].copy()
        for i in range(m):
            for j in range(3):
                v = cv[i, j]
                inc_clause[fill[v]] = i
                inc_slot[fill[v]] = j
                slot_pos[i, j] = fill[v]
                fill[v] += 1
        for arr in (cv, cn, ptr, inc_clause, inc_slot, slot_pos):
            arr.flags.writeable = False
        return PackedFormula(cv, cn, ptr, inc_clause, inc_slot, slot_pos)


@dataclass(frozen=True)
class PackedFormula:
    """Flat int arrays for jit kernels; incidence in CSR layout sorted by clause."""

    clause_vars: np.ndarray  # [M, 3] 0-based variable indices
    clause_neg: np.ndarray  # [M, 3] 1 where negated
    inc_ptr: np.ndarray  # [N+1]
    inc_clause: np.ndarray  # [3M] clause index per incidence entry
    inc_slot: np.ndarray  # [3M] slot of the variable within that clause
    slot_pos: np.ndarray  # [M, 3] inverse map: CSR position of (clause, slot)


@dataclass(frozen=True)
class Assignment:
    """Truth values for variables 1..N (position i holds variable i+1)."""

    values: tuple[bool, ...]

    @classmethod
    def from_array(cls, arr) -> Assignment:
        return cls(tuple(bool(x) for x in arr))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=bool)

    def __len__(self) -> int:
        return len(self.values)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text into a 3-CNF formula.

    Raises ValueError on: malformed or missing header, literal out of range,
    clause length != 3, duplicate variable in a clause, or clause count
    mismatch with the header.
    """
    n_vars = n_clauses = None
    tokens: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tok = line.split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] == "p":
            if n_vars is not None:
                raise ValueError(f"line {lineno}: duplicate header")
            if len(tok) != 4 or tok[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed header {line!r}")
            try:
                n_vars, n_clauses = int(tok[2]), int(tok[3])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed header {line!r}") from None
            if n_vars < 0 or n_clauses < 0:
                raise ValueError(f"line {lineno}: negative counts in header")
            continue
        if n_vars is None:
            raise ValueError(f"line {lineno}: clause data before header")
        for t in tok:
            try:
                tokens.append(int(t))
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer token {t!r}") from None
    if n_vars is None:
        raise ValueError("missing 'p cnf' header")

    clauses: list[Clause] = []
    cur: list[int] = []
    for lit in tokens:
        if lit != 0:
            if abs(lit) > n_vars:
                raise ValueError(f"literal {lit} out of range 1..{n_vars}")
            cur.append(lit)
            continue
        if len(cur) != 3:
            raise ValueError(f"clause {len(clauses) + 1}: expected 3 literals, got {len(cur)}")
        clauses.append(Clause.from_signed(*cur))
        cur = []
    if cur:
        raise ValueError("unterminated clause at end of input")
    if len(clauses) != n_clauses:
        raise ValueError(f"header declares {n_clauses} clauses, found {len(clauses)}")
    return CnfFormula(n_vars, tuple(clauses))


def serialize_dimacs(f: CnfFormula, comments: Iterable[str] = ()) -> str:
    """DIMACS text whose parse equals f; comments become leading `c` lines."""
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.n_vars} {f.n_clauses}")
    for cl in f.clauses:
        lines.append(" ".join(str(l.signed) for l in cl.literals) + " 0")
    return "\n".join(lines) + "\n"


def generate_planted(
    n: int, ratio: float = 4.3, p0: float = 0.08, seed: int = 0
) -> tuple[CnfFormula, Assignment]:
    """Random 3-CNF with a hidden satisfying assignment, M = round(ratio*n) clauses.

    Each clause picks 3 distinct variables uniformly, then a clause type
    t in {0,1,2} (number of literals false under the plant) with probabilities
    (p0, 1/2 - 2*p0, 1/2 + p0), then which positions are falsified, uniformly.
    That type law makes the per-literal satisfaction marginal exactly 1/2, so
    polarity statistics do not leak the plant.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if not 0.0 <= p0 <= 0.25:
        raise ValueError(f"p0 must be in [0, 0.25], got {p0}")
    m = int(round(ratio * n))
    if m < 1:
        raise ValueError(f"ratio*n rounds to {m} clauses; need at least 1")
    rng = np.random.default_rng(seed)
    plant = rng.integers(0, 2, size=n).astype(bool)
    type_probs = np.array([p0, 0.5 - 2 * p0, 0.5 + p0])
    clauses = []
    for _ in range(m):
        vars_ = rng.choice(n, size=3, replace=False)
        t = rng.choice(3, p=type_probs)
        false_pos = set(rng.choice(3, size=t, replace=False).tolist())
        lits = []
        for pos in range(3):
            v = int(vars_[pos])
            # literal is true under the plant iff negated != plant[v]
            make_true = pos not in false_pos
            negated = bool(plant[v]) != make_true
            lits.append(Literal(v + 1, negated))
        clauses.append(Clause(tuple(lits)))
    return CnfFormula(n, tuple(clauses)), Assignment.from_array(plant)


def evaluate(f: CnfFormula, a: Assignment) -> tuple[bool, int]:
    """(satisfied, number of unsatisfied clauses) for assignment a."""
    if len(a) != f.n_vars:
        raise ValueError(f"assignment length {len(a)} != n_vars {f.n_vars}")
    if f.n_clauses == 0:
        return True, 0
    p = f.packed
    vals = a.as_array()[p.clause_vars]  # [M, 3] variable truth values
    lit_true = vals ^ p.clause_neg.astype(bool)
    unsat = int(np.count_nonzero(~lit_true.any(axis=1)))
    return unsat == 0, unsat


def brute_force_sat(f: CnfFormula, limit: int = 26) -> Assignment | None:
    """Exhaustive search over all 2^N assignments; guarded to small N."""
    if f.n_vars > limit:
        raise ValueError(f"brute force limited to {limit} variables, got {f.n_vars}")
    n = f.n_vars
    p = f.packed
    neg = p.clause_neg.astype(bool)
    chunk = 1 << 13
    for base in range(0, 1 << n, chunk):
        count = min(chunk, (1 << n) - base)
        ids = np.arange(base, base + count, dtype=np.uint64)[:, None]
        bits = ((ids >> np.arange(n, dtype=np.uint64)) & 1).astype(bool)  # [count, N]
        lit_true = bits[:, p.clause_vars] ^ neg  # [count, M, 3]
        sat = lit_true.any(axis=2).all(axis=1)
        hit = np.flatnonzero(sat)
        if hit.size:
            return Assignment.from_array(bits[hit[0]])
    return None
