"""Partially labeled categorical decision tables.

Ingestion goes through a string-valued :class:`RawTable` (CSV cells as read),
which is discretized and binarized before :func:`encode` turns it into the
integer-coded :class:`DecisionTable` used by every other module.
"""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from typing import BinaryIO, Iterable, Sequence, TextIO, Union

import numpy as np

from .errors import ConfigurationError, FormatError, ParameterError, StateError

POSITIVE_TOKEN = "pos"
NEGATIVE_TOKEN = "neg"
DEFAULT_MISSING_TOKEN = "?"
UNLABELED = -1

BUILTIN_DATASETS = ("wine", "vehicle")


class ClassLabel(IntEnum):
    NEGATIVE = 0
    POSITIVE = 1


@dataclass(frozen=True)
class RawTable:
    """Rectangular table of text cells; ``None`` in ``decision`` marks an unlabeled row."""

    attribute_names: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]
    decision: tuple[str | None, ...]
    decision_name: str = "class"
    positive_class: str | None = None

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    def column(self, j: int) -> list[str]:
        return [row[j] for row in self.cells]


@dataclass(frozen=True, eq=False)
class DecisionTable:
    """Integer-coded decision table.

    ``codes`` has shape ``(n_rows, n_attributes)``; column ``j`` holds dense
    codes ``0..v_j``. ``decision`` is 1 (positive), 0 (negative) or -1
    (unlabeled). Both arrays are read-only.
    """

    attribute_names: tuple[str, ...]
    codes: np.ndarray
    decision: np.ndarray
    decision_name: str = "class"
    positive_class: str | None = None

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int64, copy=True)
        if codes.ndim != 2:
            codes = codes.reshape(len(self.decision), len(self.attribute_names))
        decision = np.array(self.decision, dtype=np.int8, copy=True)
        if codes.shape != (len(decision), len(self.attribute_names)):
            raise ParameterError(
                f"codes shape {codes.shape} does not match "
                f"{len(decision)} rows x {len(self.attribute_names)} attributes"
            )
        if np.any((decision < UNLABELED) | (decision > 1)):
            raise ParameterError("decision values must be -1, 0 or 1")
        if codes.size and codes.min() < 0:
            raise ParameterError("category codes must be non-negative")
        codes.setflags(write=False)
        decision.setflags(write=False)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "decision", decision)

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.codes.shape[1]

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.decision != UNLABELED

    @property
    def n_labeled(self) -> int:
        return int(np.count_nonzero(self.labeled_mask))

    @property
    def n_unlabeled(self) -> int:
        return self.n_rows - self.n_labeled

    @property
    def is_fully_labeled(self) -> bool:
        return self.n_unlabeled == 0

    def with_decision(self, decision: Sequence[int] | np.ndarray) -> "DecisionTable":
        return DecisionTable(
            self.attribute_names, self.codes, np.asarray(decision),
            self.decision_name, self.positive_class,
        )

    def take_rows(self, rows: Sequence[int] | np.ndarray) -> "DecisionTable":
        rows = np.asarray(rows, dtype=np.int64)
        return DecisionTable(
            self.attribute_names, self.codes[rows], self.decision[rows],
            self.decision_name, self.positive_class,
        )

    def labeled_only(self) -> "DecisionTable":
        return self.take_rows(np.flatnonzero(self.labeled_mask))

    def take_attributes(self, attrs: Sequence[int]) -> "DecisionTable":
        attrs = list(attrs)
        return DecisionTable(
            tuple(self.attribute_names[a] for a in attrs), self.codes[:, attrs],
            self.decision, self.decision_name, self.positive_class,
        )

    def __eq__(self, other):
        if not isinstance(other, DecisionTable):
            return NotImplemented
        return (
            self.attribute_names == other.attribute_names
            and np.array_equal(self.codes, other.codes)
            and np.array_equal(self.decision, other.decision)
        )

    __hash__ = None


def _open_text(source) -> TextIO:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def load_csv(
    source: Union[str, os.PathLike, BinaryIO, TextIO, bytes],
    missing_token: str = DEFAULT_MISSING_TOKEN,
) -> RawTable:
    """Read a CSV whose last column is the decision.

    Decision cells equal to ``missing_token`` become unlabeled (``None``).
    Raises :class:`FormatError` on an empty file, ragged rows or empty cells.
    """
    stream = _open_text(source)
    try:
        records = list(csv.reader(stream, skipinitialspace=True))
    finally:
        if isinstance(source, (str, os.PathLike)):
            stream.close()
    records = [r for r in records if r]  # blank lines
    if not records:
        raise FormatError("empty file: a header row is required")
    header = [h.strip() for h in records[0]]
    if len(header) < 1 or any(not h for h in header):
        raise FormatError("row 1: header has an empty column name")
    width = len(header)
    cells: list[tuple[str, ...]] = []
    decision: list[str | None] = []
    for lineno, record in enumerate(records[1:], start=2):
        if len(record) != width:
            raise FormatError(f"row {lineno}: expected {width} cells, got {len(record)}")
        record = [c.strip() for c in record]
        for j, c in enumerate(record):
            if not c:
                raise FormatError(f"row {lineno}: empty cell in column {header[j]!r}")
        cells.append(tuple(record[:-1]))
        decision.append(None if record[-1] == missing_token else record[-1])
    return RawTable(tuple(header[:-1]), tuple(cells), tuple(decision), header[-1])


def write_csv(raw: RawTable, dest: Union[str, os.PathLike, TextIO],
              missing_token: str = DEFAULT_MISSING_TOKEN) -> None:
    """Write ``raw`` in the same CSV shape :func:`load_csv` reads."""
    own = isinstance(dest, (str, os.PathLike))
    stream = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(list(raw.attribute_names) + [raw.decision_name])
        for row, label in zip(raw.cells, raw.decision):
            writer.writerow(list(row) + [missing_token if label is None else label])
    finally:
        if own:
            stream.close()


def _as_numbers(column: list[str]) -> np.ndarray | None:
    try:
        return np.array([float(c) for c in column], dtype=float)
    except ValueError:
        return None


def equal_frequency_codes(values: Sequence[float] | np.ndarray, bins: int) -> np.ndarray:
    """Bin a numeric column into ``bins`` equal-frequency bins.

    Boundary ``k`` is the lower empirical ``k/bins`` quantile of the sorted
    values; a value goes to the first bin whose boundary it does not exceed,
    so ties land in the lower bin. When the column has at least ``bins``
    distinct values the boundaries are pushed apart so no bin is empty.
    """
    if bins < 2:
        raise ParameterError(f"bins must be >= 2, got {bins}")
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    ordered = np.sort(x)
    distinct = np.unique(ordered)
    m = distinct.size
    raw_idx = [
        int(np.searchsorted(distinct, ordered[-(-k * n // bins) - 1]))
        for k in range(1, bins)
    ]
    if m >= bins:
        idx: list[int] = []
        for k, r in enumerate(raw_idx, start=1):
            lo = idx[-1] + 1 if idx else 0
            hi = m - 1 - (bins - k)
            idx.append(min(max(r, lo), hi))
    else:
        idx = raw_idx
    boundaries = distinct[idx]
    return np.searchsorted(boundaries, x, side="left").astype(np.int64)


def discretize_equal_frequency(raw: RawTable, bins: int = 3) -> RawTable:
    """Replace every all-numeric column by equal-frequency bin codes."""
    if bins < 2:
        raise ParameterError(f"bins must be >= 2, got {bins}")
    if raw.n_rows == 0:
        return raw
    columns = []
    for j in range(len(raw.attribute_names)):
        col = raw.column(j)
        numbers = _as_numbers(col)
        if numbers is None:
            columns.append(col)
        else:
            columns.append([str(c) for c in equal_frequency_codes(numbers, bins)])
    cells = tuple(zip(*columns)) if columns else tuple(() for _ in raw.cells)
    return RawTable(raw.attribute_names, cells, raw.decision,
                    raw.decision_name, raw.positive_class)


def majority_class(labels: Iterable[str | None]) -> str:
    """Most frequent non-missing label; ties go to the lexicographically smaller name."""
    counts = Counter(lab for lab in labels if lab is not None)
    if not counts:
        raise StateError("no labeled rows: cannot determine the majority class")
    return min(counts, key=lambda c: (-counts[c], c))


def binarize_one_vs_all(raw: RawTable) -> RawTable:
    """Map the majority class to ``pos`` and every other class to ``neg``.

    The majority is counted over labeled rows; on a fully labeled (ground
    truth) table that is every row.
    """
    present = {lab for lab in raw.decision if lab is not None}
    if not present:
        raise StateError("no labeled rows: cannot determine the majority class")
    if len(present) < 2:
        raise StateError(f"decision column has a single class {next(iter(present))!r}")
    positive = majority_class(raw.decision)
    decision = tuple(
        None if lab is None else (POSITIVE_TOKEN if lab == positive else NEGATIVE_TOKEN)
        for lab in raw.decision
    )
    return RawTable(raw.attribute_names, raw.cells, decision, raw.decision_name, positive)


def encode(raw: RawTable) -> DecisionTable:
    """Dense per-column re-encoding in order of first appearance."""
    n, m = raw.n_rows, len(raw.attribute_names)
    codes = np.zeros((n, m), dtype=np.int64)
    for j in range(m):
        seen: dict[str, int] = {}
        for i, row in enumerate(raw.cells):
            codes[i, j] = seen.setdefault(row[j], len(seen))
    mapping = {POSITIVE_TOKEN: 1, NEGATIVE_TOKEN: 0, None: UNLABELED}
    try:
        decision = np.array([mapping[lab] for lab in raw.decision], dtype=np.int8)
    except KeyError as exc:
        raise StateError(f"decision value {exc.args[0]!r} is not binarized") from None
    return DecisionTable(raw.attribute_names, codes, decision,
                         raw.decision_name, raw.positive_class)


def prior_positive_probability(
    table: DecisionTable,
    ground_truth: DecisionTable | Sequence[int] | np.ndarray | None = None,
    external: float | None = None,
) -> float:
    """|U_pos| / |U| from a full labeling, or ``external`` when no labeling is known."""
    if ground_truth is not None:
        labels = ground_truth.decision if isinstance(ground_truth, DecisionTable) \
            else np.asarray(ground_truth)
        if len(labels) != table.n_rows:
            raise ConfigurationError("ground truth length differs from the table")
        if np.any(labels == UNLABELED):
            raise ConfigurationError("ground truth must label every row")
        if len(labels) == 0:
            raise ConfigurationError("cannot compute a prior on an empty table")
        return float(np.count_nonzero(labels == 1)) / len(labels)
    if external is not None:
        if not 0.0 <= external <= 1.0:
            raise ParameterError(f"prior must lie in [0, 1], got {external}")
        return float(external)
    raise ConfigurationError(
        "prior positive probability unknown: supply ground truth or an explicit value"
    )


def builtin_dataset_path(name: str):
    """Path to a bundled dataset CSV (``wine`` or ``vehicle``)."""
    if name not in BUILTIN_DATASETS:
        raise ParameterError(f"unknown built-in dataset {name!r}; choose from {BUILTIN_DATASETS}")
    return resources.files("granred").joinpath("data", f"{name}.csv")


def prepare_table(
    source,
    bins: int | None = 3,
    missing_token: str = DEFAULT_MISSING_TOKEN,
) -> DecisionTable:
    """load -> discretize (unless ``bins`` is None) -> binarize -> encode."""
    raw = load_csv(source, missing_token)
    if bins is not None:
        raw = discretize_equal_frequency(raw, bins)
    return encode(binarize_one_vs_all(raw))
