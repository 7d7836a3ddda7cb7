"""Entropy-family measures over partitions, in bits.

Block probabilities always use the partition's ``universe_size`` as the
denominator, so a partition restricted to a subset of rows (blocks pruned
away) still yields the contribution those blocks make to the full-universe
value. Sums are taken with :func:`math.fsum`, which makes results independent
of block order and of zero-valued blocks.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import ParameterError, StateError
from .partition import (
    Partition,
    _same_coverage,
    partition_by,
    partition_trivial,
)
from .tabular import DecisionTable


def _require_universe(p: Partition) -> None:
    if p.universe_size <= 0:
        raise ParameterError("universe_size must be positive")


def _check_pair(cond: Partition, dec: Partition) -> None:
    _require_universe(cond)
    if not _same_coverage(cond, dec):
        raise StateError("condition and decision partitions cover different rows")


def _plogp(q: np.ndarray) -> np.ndarray:
    out = np.zeros_like(q, dtype=float)
    nz = q > 0
    out[nz] = q[nz] * np.log2(q[nz])
    return out


def block_label_counts(cond: Partition, labels: np.ndarray, n_labels: int) -> np.ndarray:
    """``counts[i, j] = |X_i ∩ Y_j|`` given a row -> decision-block index map."""
    if not cond.blocks:
        return np.zeros((0, n_labels), dtype=np.int64)
    rows = np.concatenate(cond.blocks)
    block_of = np.repeat(np.arange(len(cond.blocks)), cond.sizes)
    flat = np.bincount(block_of * n_labels + labels[rows], minlength=len(cond.blocks) * n_labels)
    return flat.reshape(len(cond.blocks), n_labels)


def block_entropies(counts: np.ndarray) -> np.ndarray:
    """Per-block ``-Σ_j P(Y_j|X_i) log2 P(Y_j|X_i)``."""
    sizes = counts.sum(axis=1, keepdims=True)
    if counts.size == 0:
        return np.zeros(counts.shape[0])
    return -_plogp(counts / sizes).sum(axis=1)


def _weighted(cond: Partition, dec: Partition, power: int) -> float:
    counts = block_label_counts(cond, dec.block_ids(), max(len(dec), 1))
    h = block_entropies(counts)
    share = cond.sizes / cond.universe_size
    return math.fsum((share ** power * h).tolist()) + 0.0


def gh_from_labels(cond: Partition, labels: np.ndarray, n_labels: int) -> float:
    """Granular conditional entropy without coverage checks (search hot path)."""
    counts = block_label_counts(cond, labels, n_labels)
    h = block_entropies(counts)
    share = cond.sizes / cond.universe_size
    return math.fsum((share * share * h).tolist()) + 0.0


def entropy(p: Partition) -> float:
    """H(B) = -Σ P(X_i) log2 P(X_i)."""
    _require_universe(p)
    share = p.sizes / p.universe_size
    return -math.fsum(_plogp(share).tolist()) + 0.0


def conditional_entropy(cond: Partition, dec: Partition) -> float:
    """H(D|B) = Σ_i P(X_i) H(D | X_i), with joint probability |X_i ∩ Y_j| / |U|."""
    _check_pair(cond, dec)
    return _weighted(cond, dec, 1)


def granularity(p: Partition) -> float:
    """G(B) = Σ P(X_i)^2: 1 for the one-block partition, 1/|U| for singletons."""
    _require_universe(p)
    share = p.sizes / p.universe_size
    return math.fsum((share * share).tolist())


def granular_conditional_entropy(cond: Partition, dec: Partition) -> float:
    """GH(D|B) = -Σ_i P(X_i)^2 Σ_j P(Y_j|X_i) log2 P(Y_j|X_i)."""
    _check_pair(cond, dec)
    return _weighted(cond, dec, 2)


def _partition_of(table: DecisionTable, attrs: Sequence[int]) -> Partition:
    return partition_by(table, attrs) if attrs else partition_trivial(table)


def significance(table: DecisionTable, a: int, P: Sequence[int], dec: Partition) -> float:
    """Sig(a, P, D) = GH(D|P) - GH(D|P ∪ {a}); never negative."""
    P = list(P)
    if a in P:
        raise ParameterError(f"attribute {a} already belongs to P")
    before = granular_conditional_entropy(_partition_of(table, P), dec)
    after = granular_conditional_entropy(partition_by(table, P + [a]), dec)
    return before - after


def gh_attribute_given_reduct(table: DecisionTable, a: int, red: Sequence[int]) -> float:
    """GH({a}|RED): zero exactly when ``a`` is functionally determined by ``red``."""
    red = list(red)
    if a in red:
        raise ParameterError(f"attribute {a} already belongs to the reduct")
    return granular_conditional_entropy(_partition_of(table, red), partition_by(table, [a]))
