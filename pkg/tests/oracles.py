"""Independent reference implementations used as test oracles.

Nothing here imports the measure, proxy or reduction code under test; the
oracles work from plain Python lists and dictionaries.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from mpmath import mp, mpf

from granred.tabular import DecisionTable


def random_table(rng: np.random.Generator, max_rows=12, max_attrs=6, max_values=4,
                 labeled=True) -> DecisionTable:
    n = int(rng.integers(1, max_rows + 1))
    m = int(rng.integers(1, max_attrs + 1))
    values = rng.integers(1, max_values + 1, size=m)
    codes = np.column_stack([rng.integers(0, v, size=n) for v in values])
    decision = rng.integers(0, 2, size=n)
    if not labeled:
        decision = np.where(rng.random(n) < 0.5, -1, decision)
    return DecisionTable(tuple(f"a{j}" for j in range(m)), codes, decision)


def brute_blocks(codes, attrs) -> list[list[int]]:
    groups: dict[tuple, list[int]] = {}
    for i, row in enumerate(codes.tolist()):
        groups.setdefault(tuple(row[a] for a in attrs), []).append(i)
    return sorted(groups.values(), key=lambda b: b[0])


def naive_measures(codes, decision, attrs) -> tuple[float, float, float]:
    """(H(B), H(D|B), GH(D|B)) by a triple loop over blocks, classes and rows."""
    n = len(decision)
    blocks = brute_blocks(codes, attrs) if attrs else [list(range(n))]
    classes = sorted(set(int(d) for d in decision))
    h = h_cond = gh = 0.0
    for block in blocks:
        p_block = len(block) / n
        h -= p_block * math.log2(p_block)
        inner = 0.0
        for c in classes:
            joint = 0
            for i in block:
                if int(decision[i]) == c:
                    joint += 1
            if joint:
                q = joint / len(block)
                inner -= q * math.log2(q)
                h_cond -= (joint / n) * math.log2(q)
        gh += p_block ** 2 * inner
    return h, h_cond, gh


def naive_gh(codes, decision, attrs) -> float:
    return naive_measures(codes, decision, attrs)[2]


def naive_reduct_ok(codes, decision, red, tol=1e-10) -> bool:
    """Condition (I) and (II) of a reduct checked by exhaustive leave-one-out."""
    full = naive_gh(codes, decision, list(range(codes.shape[1])))
    if abs(naive_gh(codes, decision, list(red)) - full) > tol:
        return False
    return all(
        abs(naive_gh(codes, decision, [b for b in red if b != a]) - full) > tol for a in red
    )


def hp_p_init(gamma, n_labeled, epsilon, delta):
    mp.dps = 50
    if n_labeled > delta:
        return mpf(1)
    g = mpf(gamma) if not isinstance(gamma, tuple) else mpf(gamma[0]) / mpf(gamma[1])
    return g ** (1 + mp.e ** (-mpf(epsilon) * delta * n_labeled))


def hp_p_prior(prior, n_universe, epsilon):
    mp.dps = 50
    prior = mpf(prior)
    scale = (1 + mpf(epsilon)) ** n_universe
    if prior <= mpf("0.5"):
        return min(prior * scale, mpf("0.5"))
    return 1 - min((1 - prior) * scale, mpf("0.5"))


def brute_laplacian(codes, t):
    """All-pairs Laplacian score with an explicitly enumerated neighbor graph."""
    n, m = codes.shape
    rows = codes.tolist()
    dist = [[sum(x != y for x, y in zip(rows[i], rows[j])) for j in range(n)] for i in range(n)]
    near = []
    for i in range(n):
        others = sorted((dist[i][j], j) for j in range(n) if j != i)
        near.append({j for _, j in others[:t]})
    scores = []
    for a in range(m):
        col = [r[a] for r in rows]
        mean = sum(col) / n
        var = sum((v - mean) ** 2 for v in col) / (n - 1)
        total = 0.0
        for i, j in itertools.product(range(n), repeat=2):
            if j in near[i] or i in near[j]:
                total += (col[i] - col[j]) ** 2
        scores.append(math.inf if var == 0 else total / var)
    return scores
