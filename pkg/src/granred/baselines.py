"""Comparison selectors: Fisher score, Laplacian score, labeled-only GCE.

Category codes are used as plain integers for the score arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StateError
from .partition import AttributeSubset
from .reduction import ReductTrace, reduce
from .tabular import DecisionTable

DEFAULT_LAPLACIAN_NEIGHBORS = 5


@dataclass(frozen=True)
class AttributeScores:
    """One score per attribute. Degenerate attributes carry ``inf``:
    a perfect separator for Fisher scores, a constant column for Laplacian ones.
    """

    scores: np.ndarray
    higher_better: bool

    def __len__(self) -> int:
        return len(self.scores)


def fisher_scores(table: DecisionTable) -> AttributeScores:
    """S_B / S_W per attribute over the labeled rows only."""
    lab = table.labeled_only()
    y = lab.decision
    if not (np.any(y == 1) and np.any(y == 0)):
        raise StateError("Fisher score needs labeled rows from both classes")
    x = lab.codes.astype(float)
    mu = x.mean(axis=0)
    s_b = np.zeros(x.shape[1])
    s_w = np.zeros(x.shape[1])
    for c in (0, 1):
        xc = x[y == c]
        mu_c = xc.mean(axis=0)
        s_b += len(xc) * (mu_c - mu) ** 2
        s_w += ((xc - mu_c) ** 2).sum(axis=0)
    scores = np.zeros(x.shape[1])
    sep = s_w > 0
    scores[sep] = s_b[sep] / s_w[sep]
    scores[(~sep) & (s_b > 0)] = np.inf
    return AttributeScores(scores, higher_better=True)


def hamming_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise count of disagreeing columns between the rows of ``a`` and ``b``."""
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.int64)
    for j in range(a.shape[1]):
        out += a[:, j][:, None] != b[:, j][None, :]
    return out


def knn_graph(codes: np.ndarray, neighbors: int) -> np.ndarray:
    """Symmetric 0/1 adjacency: i~j when either is among the other's t nearest (Hamming)."""
    n = codes.shape[0]
    d = hamming_distances(codes, codes)
    np.fill_diagonal(d, np.iinfo(np.int64).max)
    # stable sort keeps lower row indices first among equal distances
    nearest = np.argsort(d, axis=1, kind="stable")[:, :neighbors]
    s = np.zeros((n, n), dtype=bool)
    s[np.repeat(np.arange(n), neighbors), nearest.ravel()] = True
    return s | s.T


def laplacian_scores(table: DecisionTable,
                     neighbors: int = DEFAULT_LAPLACIAN_NEIGHBORS) -> AttributeScores:
    """Σ_ij (a_i - a_j)^2 S_ij / Var(a) on all rows, labels ignored; lower is better."""
    n = table.n_rows
    if neighbors < 1:
        raise ParameterError(f"neighbors must be >= 1, got {neighbors}")
    if n < neighbors + 1:
        raise ParameterError(f"need at least {neighbors + 1} rows, got {n}")
    s = knn_graph(table.codes, neighbors)
    i, j = np.nonzero(s)
    x = table.codes.astype(float)
    smooth = ((x[i] - x[j]) ** 2).sum(axis=0)
    var = x.var(axis=0, ddof=1)
    scores = np.full(x.shape[1], np.inf)
    ok = var > 0
    scores[ok] = smooth[ok] / var[ok]
    return AttributeScores(scores, higher_better=False)


def select_top_k(scores: AttributeScores, k: int) -> AttributeSubset:
    """The ``k`` best attributes (ties to the lowest index), returned sorted."""
    m = len(scores)
    if not 1 <= k <= m:
        raise ParameterError(f"k must lie in 1..{m}, got {k}")
    s = np.asarray(scores.scores, dtype=float)
    key = -s if scores.higher_better else s
    order = np.argsort(key, kind="stable")
    return tuple(sorted(int(a) for a in order[:k]))


def gce_labeled_only(table: DecisionTable, **kwargs) -> ReductTrace:
    """Reduct of the labeled rows alone (unlabeled rows dropped)."""
    lab = table.labeled_only()
    if lab.n_rows == 0:
        raise StateError("no labeled rows")
    return reduce(lab, **kwargs)
