"""Greedy forward reduct search driven by granular conditional entropy.

The search starts from the single attribute with the lowest GH(D|{a}) and
keeps adding the attribute with the largest significance until GH(D|RED)
reaches GH(D|C). Two optional accelerations shrink the work without changing
the result:

* rows whose RED-block is already decision-pure are dropped (they contribute
  zero to GH now and after any further refinement);
* candidates that are constant inside every remaining block are dropped
  (refining by them is the identity).

All GH values use the original |U| as denominator, so pruned and unpruned
states give identical numbers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, StateError
from .measures import block_entropies, block_label_counts, gh_from_labels
from .partition import (
    Partition,
    decision_partition,
    partition_by,
    partition_trivial,
    refine,
)
from .tabular import UNLABELED, DecisionTable

DEFAULT_TOLERANCE = 1e-10
THREADS_ENV = "GRANRED_THREADS"


@dataclass(frozen=True)
class RoundRecord:
    attribute: int
    significance: float
    gh_after: float
    pruned_examples: int = 0
    pruned_attributes: int = 0
    forced: bool = False


@dataclass(frozen=True)
class ReductTrace:
    selected: tuple[int, ...]
    gh_full: float
    rounds: tuple[RoundRecord, ...]
    minimality_enforced: bool = False
    accelerated: bool = True
    attribute_names: tuple[str, ...] = ()
    # Greedy order before the minimality pass; equals ``selected`` otherwise.
    greedy_selected: tuple[int, ...] = ()

    @property
    def gh_trace(self) -> tuple[float, ...]:
        return tuple(r.gh_after for r in self.rounds)

    @property
    def selected_names(self) -> list[str]:
        return [self.attribute_names[a] for a in self.selected]

    def __len__(self) -> int:
        return len(self.selected)


@dataclass(frozen=True)
class SearchState:
    live: np.ndarray
    partition: Partition
    candidates: tuple[int, ...]
    selected: tuple[int, ...]
    universe_size: int
    labels: np.ndarray = field(repr=False)
    n_labels: int = 2


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _argbest(values: Sequence[float], keys: Sequence[int], tol: float, maximize: bool) -> int:
    """Position of the best value; near-ties (within ``tol``) go to the lowest key."""
    vals = np.asarray(values, dtype=float)
    best = vals.max() if maximize else vals.min()
    close = np.flatnonzero(np.abs(vals - best) <= tol)
    return int(min(close, key=lambda i: keys[i]))


def _labels(table: DecisionTable) -> tuple[np.ndarray, int]:
    dec = decision_partition(table)
    return dec.block_ids(), max(len(dec), 1)


def _require_labeled(table: DecisionTable) -> None:
    if table.n_attributes == 0:
        raise StateError("table has no condition attributes")
    if np.any(table.decision == UNLABELED):
        raise StateError("reduct search needs a fully labeled table; assign proxy labels first")


def initial_attribute(table: DecisionTable, dec: Partition,
                      tolerance: float = DEFAULT_TOLERANCE) -> int:
    """argmin over a of GH(D|{a}); ties go to the lowest index."""
    if table.n_attributes == 0:
        raise StateError("table has no condition attributes")
    labels, n_labels = dec.block_ids(), max(len(dec), 1)
    values = [gh_from_labels(partition_by(table, [a]), labels, n_labels)
              for a in range(table.n_attributes)]
    return _argbest(values, list(range(table.n_attributes)), tolerance, maximize=False)


def _pure_mask(partition: Partition, labels: np.ndarray, n_labels: int) -> np.ndarray:
    counts = block_label_counts(partition, labels, n_labels)
    return np.count_nonzero(counts, axis=1) <= 1


def _restrict(partition: Partition, keep: np.ndarray) -> Partition:
    return Partition(tuple(b for b, k in zip(partition.blocks, keep) if k),
                     partition.universe_size)


def prune_consistent_examples(state: SearchState, dec: Partition | None = None) -> SearchState:
    """Drop every decision-pure block of the current partition from the live set."""
    labels, n_labels = (state.labels, state.n_labels) if dec is None \
        else (dec.block_ids(), max(len(dec), 1))
    pure = _pure_mask(state.partition, labels, n_labels)
    if not pure.any():
        return state
    partition = _restrict(state.partition, ~pure)
    return replace(state, partition=partition, live=partition.covered())


def _is_determined(partition: Partition, column: np.ndarray) -> bool:
    # GH({a}|RED) is exactly 0 iff a is constant within every block.
    for block in partition.blocks:
        vals = column[block]
        if vals.size and np.any(vals != vals[0]):
            return False
    return True


def prune_redundant_attributes(state: SearchState, table: DecisionTable) -> SearchState:
    """Drop candidates functionally determined by RED on the live rows."""
    keep = tuple(a for a in state.candidates
                 if not _is_determined(state.partition, table.codes[:, a]))
    return replace(state, candidates=keep)


def _impure_partition(partition: Partition, labels: np.ndarray, n_labels: int) -> Partition:
    return _restrict(partition, ~_pure_mask(partition, labels, n_labels))


def enforce_minimality(table: DecisionTable, red: Sequence[int], gh_target: float,
                       tolerance: float = DEFAULT_TOLERANCE) -> tuple[int, ...]:
    """Backward pass (reverse selection order) deleting attributes whose removal keeps GH at the target."""
    labels, n_labels = _labels(table)

    def gh(attrs):
        p = partition_by(table, attrs) if attrs else partition_trivial(table)
        return gh_from_labels(p, labels, n_labels)

    red = list(red)
    if abs(gh(red) - gh_target) > tolerance:
        raise StateError("GH(D|RED) does not match the target; nothing to minimise")
    for a in reversed(list(red)):
        trial = [b for b in red if b != a]
        if abs(gh(trial) - gh_target) <= tolerance:
            red = trial
    return tuple(red)


def reduce(
    table: DecisionTable,
    accelerate: bool = True,
    enforce_min: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int | None = None,
) -> ReductTrace:
    """Greedy forward reduct search over a fully labeled table.

    Acceleration only changes the amount of work: the selected sequence and
    the GH trace are the same with it on or off.
    """
    _require_labeled(table)
    workers = worker_count(workers)
    labels, n_labels = _labels(table)
    n_attr = table.n_attributes

    gh_full = gh_from_labels(partition_by(table, range(n_attr)), labels, n_labels)
    gh_empty = gh_from_labels(partition_trivial(table), labels, n_labels)

    dec = decision_partition(table)
    first = initial_attribute(table, dec, tolerance)
    partition = partition_by(table, [first])
    gh_cur = gh_from_labels(partition, labels, n_labels)
    state = SearchState(
        live=np.arange(table.n_rows, dtype=np.int64), partition=partition,
        candidates=tuple(a for a in range(n_attr) if a != first), selected=(first,),
        universe_size=table.n_rows, labels=labels, n_labels=n_labels,
    )

    def prune(s: SearchState) -> tuple[SearchState, int, int]:
        if not accelerate:
            return s, 0, 0
        pruned = prune_consistent_examples(s)
        pruned = prune_redundant_attributes(pruned, table)
        return (pruned, s.live.size - pruned.live.size,
                len(s.candidates) - len(pruned.candidates))

    state, n_ex, n_at = prune(state)
    rounds = [RoundRecord(first, gh_empty - gh_cur, gh_cur, n_ex, n_at)]

    while gh_cur - gh_full > tolerance and state.candidates:
        cands = state.candidates
        refined = _map(lambda a: refine(state.partition, table, a), cands, workers)
        ghs = [gh_from_labels(p, labels, n_labels) for p in refined]
        sigs = [gh_cur - g for g in ghs]
        pos = _argbest(sigs, cands, tolerance, maximize=True)
        forced = sigs[pos] <= tolerance
        if forced:
            # No candidate lowers GH measurably: take the finest split of the impure blocks.
            impure = _impure_partition(state.partition, labels, n_labels)
            counts = [len(refine(impure, table, a)) for a in cands]
            pos = _argbest(counts, cands, 0.0, maximize=True)
        chosen = cands[pos]
        gh_cur = ghs[pos]
        state = replace(
            state, partition=refined[pos], selected=state.selected + (chosen,),
            candidates=tuple(a for a in cands if a != chosen),
        )
        state, n_ex, n_at = prune(state)
        rounds.append(RoundRecord(chosen, sigs[pos], gh_cur, n_ex, n_at, forced))

    greedy = state.selected
    selected = greedy
    if enforce_min:
        selected = enforce_minimality(table, greedy, gh_full, tolerance)
    return ReductTrace(
        selected=selected, gh_full=gh_full, rounds=tuple(rounds),
        minimality_enforced=enforce_min, accelerated=accelerate,
        attribute_names=table.attribute_names, greedy_selected=greedy,
    )
