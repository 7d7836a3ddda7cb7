"""Proxy labels for unlabeled rows from a class prior and the labeled class ratio.

Every unlabeled row receives the same label, decided by the product
``lam = p_init * p_prior``: positive when ``lam <= 0.5``, negative otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StateError
from .tabular import UNLABELED, ClassLabel, DecisionTable

DEFAULT_EPSILON = 0.0002
DEFAULT_DELTA = 500


@dataclass(frozen=True)
class ProxyParams:
    prior_pos: float
    epsilon: float = DEFAULT_EPSILON
    delta: int = DEFAULT_DELTA

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if self.delta < 1:
            raise ParameterError(f"delta must be >= 1, got {self.delta}")
        if not 0.0 <= self.prior_pos <= 1.0:
            raise ParameterError(f"prior_pos must lie in [0, 1], got {self.prior_pos}")


@dataclass(frozen=True)
class LabeledStats:
    n_pos: int
    n_neg: int
    gamma: float  # math.inf when n_neg == 0
    n_labeled: int

    @property
    def gamma_infinite(self) -> bool:
        return math.isinf(self.gamma)


@dataclass(frozen=True)
class ProxyDecision:
    p_init: float
    p_prior: float
    lam: float
    label: ClassLabel
    degenerate: bool = False

    def summary(self, stats: LabeledStats | None = None) -> str:
        head = f"gamma={stats.gamma:.6g} " if stats is not None else ""
        return (
            f"{head}p_init={self.p_init:.10g} p_prior={self.p_prior:.10g} "
            f"lambda={self.lam:.10g} label={'positive' if self.label else 'negative'}"
        )


def labeled_stats(table: DecisionTable) -> LabeledStats:
    n_pos = int(np.count_nonzero(table.decision == 1))
    n_neg = int(np.count_nonzero(table.decision == 0))
    if n_pos + n_neg == 0:
        raise StateError("no labeled rows")
    gamma = math.inf if n_neg == 0 else n_pos / n_neg
    return LabeledStats(n_pos, n_neg, gamma, n_pos + n_neg)


def p_init(stats: LabeledStats, params: ProxyParams) -> float:
    """gamma ** (1 + exp(-epsilon * delta * |L|)) for |L| <= delta, else 1."""
    gamma = stats.gamma
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ParameterError(f"gamma must be finite and > 0, got {gamma}")
    if stats.n_labeled > params.delta:
        return 1.0
    return gamma ** (1.0 + math.exp(-params.epsilon * params.delta * stats.n_labeled))


def p_prior(n_universe: int, params: ProxyParams) -> float:
    """Prior part, pulled towards 0.5 as the universe grows and clamped there."""
    if n_universe < 1:
        raise ParameterError(f"|U| must be >= 1, got {n_universe}")
    scale = (1.0 + params.epsilon) ** n_universe
    prior = params.prior_pos
    if prior <= 0.5:
        return min(prior * scale, 0.5)
    return 1.0 - min((1.0 - prior) * scale, 0.5)


def proxy_decision(table: DecisionTable, params: ProxyParams) -> ProxyDecision:
    stats = labeled_stats(table)
    prior = p_prior(table.n_rows, params)
    # No negative labeled rows: label the rest negative; no positives: positive.
    if stats.n_neg == 0:
        return ProxyDecision(math.inf, prior, 1.0, ClassLabel.NEGATIVE, degenerate=True)
    if stats.n_pos == 0:
        return ProxyDecision(0.0, prior, 0.0, ClassLabel.POSITIVE, degenerate=True)
    init = p_init(stats, params)
    lam = init * prior
    label = ClassLabel.POSITIVE if lam <= 0.5 else ClassLabel.NEGATIVE
    return ProxyDecision(init, prior, lam, label)


def assign_proxy_labels(
    table: DecisionTable, params: ProxyParams
) -> tuple[DecisionTable, ProxyDecision]:
    """Fill every unlabeled row with the single proxy label; labeled rows are kept."""
    decision = proxy_decision(table, params)
    labels = np.array(table.decision, copy=True)
    labels[labels == UNLABELED] = int(decision.label)
    return table.with_decision(labels), decision
