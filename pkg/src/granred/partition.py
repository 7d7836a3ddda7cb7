"""Equivalence-class partitions U/B and rough-set regions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError, StateError
from .tabular import UNLABELED, DecisionTable

AttributeSubset = tuple[int, ...]


def attribute_subset(indices: Iterable[int], n_attributes: int | None = None) -> AttributeSubset:
    """Sorted, duplicate-free attribute indices, range-checked when ``n_attributes`` is given."""
    subset = tuple(sorted({int(i) for i in indices}))
    if n_attributes is not None:
        for a in subset:
            if not 0 <= a < n_attributes:
                raise ParameterError(f"attribute index {a} out of range 0..{n_attributes - 1}")
    return subset


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint blocks of row indices.

    Blocks are sorted ascending internally and ordered by their smallest
    member, so two partitions of the same rows compare equal block-for-block.
    ``universe_size`` is the row count of the originating table; blocks may
    cover only part of it (pruned search states).
    """

    blocks: tuple[np.ndarray, ...]
    universe_size: int

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], universe_size: int) -> "Partition":
        arrays = [np.sort(np.asarray(list(b), dtype=np.int64)) for b in blocks]
        arrays = [b for b in arrays if b.size]
        arrays.sort(key=lambda b: int(b[0]))
        for b in arrays:
            b.setflags(write=False)
        return cls(tuple(arrays), universe_size)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def sizes(self) -> np.ndarray:
        return np.fromiter((b.size for b in self.blocks), dtype=np.int64, count=len(self.blocks))

    @property
    def n_covered(self) -> int:
        return int(sum(b.size for b in self.blocks))

    def covered(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(self.blocks))

    def as_lists(self) -> list[list[int]]:
        return [b.tolist() for b in self.blocks]

    def block_ids(self) -> np.ndarray:
        """Row -> block index over the whole universe (-1 for uncovered rows)."""
        ids = np.full(self.universe_size, -1, dtype=np.int64)
        for k, b in enumerate(self.blocks):
            ids[b] = k
        return ids

    def refines(self, other: "Partition") -> bool:
        """True when every block of ``self`` lies inside one block of ``other``."""
        ids = other.block_ids()
        return all(np.unique(ids[b]).size == 1 and ids[b[0]] >= 0 for b in self.blocks)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (
            self.universe_size == other.universe_size
            and len(self.blocks) == len(other.blocks)
            and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))
        )

    __hash__ = None

    def __repr__(self):
        return f"Partition({self.as_lists()}, universe_size={self.universe_size})"


def group_rows(rows: np.ndarray, keys: np.ndarray, universe_size: int) -> Partition:
    """Split ``rows`` into blocks of equal ``keys`` in canonical order."""
    if rows.size == 0:
        return Partition((), universe_size)
    order = np.lexsort((rows, keys))
    rows_s, keys_s = rows[order], keys[order]
    cuts = np.flatnonzero(keys_s[1:] != keys_s[:-1]) + 1
    blocks = np.split(rows_s, cuts)
    blocks.sort(key=lambda b: int(b[0]))
    for b in blocks:
        b.setflags(write=False)
    return Partition(tuple(blocks), universe_size)


def _check_attr(table: DecisionTable, a: int) -> None:
    if not 0 <= a < table.n_attributes:
        raise ParameterError(f"attribute index {a} out of range 0..{table.n_attributes - 1}")


def partition_trivial(table: DecisionTable) -> Partition:
    """U/{} = {U}; the empty universe has no blocks."""
    n = table.n_rows
    if n == 0:
        return Partition((), 0)
    block = np.arange(n, dtype=np.int64)
    block.setflags(write=False)
    return Partition((block,), n)


def partition_by(table: DecisionTable, attrs: Sequence[int]) -> Partition:
    """U/B: rows share a block iff they agree on every attribute in ``attrs``."""
    attrs = list(attrs)
    if not attrs:
        raise ParameterError("attrs must be nonempty; use partition_trivial for U/{}")
    for a in attrs:
        _check_attr(table, a)
    rows = np.arange(table.n_rows, dtype=np.int64)
    if table.n_rows == 0:
        return Partition((), 0)
    _, keys = np.unique(table.codes[:, attrs], axis=0, return_inverse=True)
    return group_rows(rows, keys.reshape(-1), table.n_rows)


def refine(p: Partition, table: DecisionTable, attr: int) -> Partition:
    """Split every block of ``p`` by the values of ``attr``.

    Cost is linear-logarithmic in the rows ``p`` covers, not in |U|.
    """
    _check_attr(table, attr)
    if not p.blocks:
        return p
    rows = np.concatenate(p.blocks)
    block_of = np.repeat(np.arange(len(p.blocks), dtype=np.int64), p.sizes)
    width = int(table.codes[:, attr].max()) + 1
    keys = block_of * width + table.codes[rows, attr]
    return group_rows(rows, keys, p.universe_size)


def decision_partition(table: DecisionTable) -> Partition:
    """U/D over a fully labeled table (at most a positive and a negative block)."""
    if np.any(table.decision == UNLABELED):
        raise StateError("decision partition requires every row to be labeled")
    rows = np.arange(table.n_rows, dtype=np.int64)
    return group_rows(rows, table.decision.astype(np.int64), table.n_rows)


def _same_coverage(a: Partition, b: Partition) -> bool:
    return a.universe_size == b.universe_size and np.array_equal(a.covered(), b.covered())


def regions(cond: Partition, dec: Partition) -> tuple[frozenset, frozenset, frozenset]:
    """Positive, boundary and negative regions of ``dec`` with respect to ``cond``.

    The negative region collects rows of the universe outside every upper
    approximation, which is empty whenever ``dec`` covers the whole universe.
    """
    if not _same_coverage(cond, dec):
        raise StateError("condition and decision partitions cover different rows")
    dec_ids = dec.block_ids()
    positive: list[int] = []
    boundary: list[int] = []
    for block in cond.blocks:
        if np.unique(dec_ids[block]).size == 1:
            positive.extend(block.tolist())
        else:
            boundary.extend(block.tolist())
    covered = set(positive) | set(boundary)
    negative = frozenset(i for i in range(cond.universe_size) if i not in covered)
    return frozenset(positive), frozenset(boundary), negative
