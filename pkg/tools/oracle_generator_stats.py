"""Independent clause-type counting oracle for the planted generator.

Reads a DIMACS file plus a plant (one line of 0/1 per variable, from the
`c plant ...` comment the generator emits) and counts, per clause, how many
literals are FALSE under the plant. Compares the (t=0,1,2) frequencies to
(p0, 1/2-2*p0, 1/2+p0) with a chi-square statistic, and checks per-variable
polarity balance. Shares no code with the package: plain text processing.

Usage: python oracle_generator_stats.py file.cnf [p0]
"""
import sys


def read_dimacs_with_plant(path):
    plant = None
    lits = []
    n = m = None
    with open(path) as fh:
        for line in fh:
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "c":
                if len(tok) > 1 and tok[1] == "plant":
                    plant = [c == "1" for c in tok[2]]
                continue
            if tok[0] == "p":
                n, m = int(tok[2]), int(tok[3])
                continue
            lits.extend(int(t) for t in tok)
    clauses, cur = [], []
    for l in lits:
        if l == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(l)
    assert not cur and len(clauses) == m and plant is not None and len(plant) == n
    return n, clauses, plant


def type_counts(clauses, plant):
    counts = [0, 0, 0, 0]
    for cl in clauses:
        t = sum(1 for l in cl if (plant[abs(l) - 1] if l > 0 else not plant[abs(l) - 1]) is False)
        counts[t] += 1
    return counts


def chi_square(counts, p0):
    probs = [p0, 0.5 - 2 * p0, 0.5 + p0]
    total = sum(counts)
    assert counts[3] == 0, "type-3 clause: plant does not satisfy formula"
    return sum(
        (counts[t] - total * probs[t]) ** 2 / (total * probs[t]) for t in range(3)
    )


def polarity_balance(clauses, n):
    pos = [0] * n
    tot = [0] * n
    for cl in clauses:
        for l in cl:
            tot[abs(l) - 1] += 1
            if l > 0:
                pos[abs(l) - 1] += 1
    return sum(pos), sum(tot)


if __name__ == "__main__":
    path = sys.argv[1]
    p0 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.08
    n, clauses, plant = read_dimacs_with_plant(path)
    counts = type_counts(clauses, plant)
    chi2 = chi_square(counts, p0)
    pos, tot = polarity_balance(clauses, n)
    m = len(clauses)
    print(f"M={m} type counts={counts[:3]} (type3={counts[3]})")
    print(f"observed freqs = {[c / m for c in counts[:3]]}")
    print(f"expected freqs = {[p0, 0.5 - 2 * p0, 0.5 + p0]}")
    print(f"chi2 (2 dof)   = {chi2:.4f}  (3-sigma-ish bound: 17.0)")
    print(f"positive literal fraction = {pos / tot:.5f} (expect 0.5 +- 3*0.5/sqrt({tot}))")
