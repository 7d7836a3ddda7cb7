"""Experimental protocol: labeled/unlabeled splits, k-NN, repeated CV, experiment runs."""

from __future__ import annotations

import csv
import io
import os
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import (
    DEFAULT_LAPLACIAN_NEIGHBORS,
    fisher_scores,
    gce_labeled_only,
    hamming_distances,
    laplacian_scores,
    select_top_k,
)
from .errors import ConfigurationError, GranredError, ParameterError, SplitError
from .proxy import DEFAULT_DELTA, DEFAULT_EPSILON, ProxyParams, assign_proxy_labels
from .reduction import _map, reduce, worker_count
from .tabular import (
    BUILTIN_DATASETS,
    UNLABELED,
    DecisionTable,
    builtin_dataset_path,
    prepare_table,
    prior_positive_probability,
)

METHODS = ("gce", "gce-l", "fisher", "laplacian", "gt", "raw")
# Display names used in summaries, following the initial/final vocabulary.
METHOD_LABELS = {"gce": "final", "gce-l": "initial"}


@dataclass(frozen=True)
class SplitSpec:
    """Label rate ``alpha`` and positive ratio ``beta``; the studied ranges are
    alpha in [0.01, 0.3] (plus 1.0 for ground truth) and beta in [0.5, 1.5]."""

    alpha: float
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be > 0, got {self.beta}")


def derive_seed(master: int, *path: int) -> int:
    """Independent 32-bit seed for the cell identified by ``path``."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1)[0])


def _round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)) // 1)


def split_counts(n_rows: int, n_positive: int, alpha: float, beta: float) -> tuple[int, int]:
    """(|L_pos|, |L_neg|) with |L_pos| = round(beta * P_pos * alpha * |U|),
    |L_neg| = round(alpha * |U|) - |L_pos|, rounding half up on exact rationals."""
    a, b = Fraction(str(alpha)), Fraction(str(beta))
    n_lab = _round_half_up(a * n_rows)
    n_pos = _round_half_up(b * a * n_positive)
    return n_pos, n_lab - n_pos


def make_split(table: DecisionTable, spec: SplitSpec) -> DecisionTable:
    """Keep labels on |L_pos| positive and |L_neg| negative rows drawn uniformly; hide the rest.

    ``alpha == 1`` returns the ground-truth table unchanged.
    """
    if not table.is_fully_labeled:
        raise SplitError("make_split needs ground-truth labels on every row")
    if spec.alpha == 1.0:
        return table
    pos_idx = np.flatnonzero(table.decision == 1)
    neg_idx = np.flatnonzero(table.decision == 0)
    n_pos, n_neg = split_counts(table.n_rows, pos_idx.size, spec.alpha, spec.beta)
    if n_pos < 1:
        raise SplitError(f"|L_pos| = {n_pos} < 1 (alpha={spec.alpha}, beta={spec.beta})")
    if n_neg < 1:
        raise SplitError(f"|L_neg| = {n_neg} < 1 (alpha={spec.alpha}, beta={spec.beta})")
    if n_pos > pos_idx.size:
        raise SplitError(f"|L_pos| = {n_pos} exceeds the {pos_idx.size} positive rows")
    if n_neg > neg_idx.size:
        raise SplitError(f"|L_neg| = {n_neg} exceeds the {neg_idx.size} negative rows")
    rng = np.random.default_rng(spec.seed)
    keep = np.concatenate([
        rng.choice(pos_idx, n_pos, replace=False),
        rng.choice(neg_idx, n_neg, replace=False),
    ])
    labels = np.full(table.n_rows, UNLABELED, dtype=np.int8)
    labels[keep] = table.decision[keep]
    return table.with_decision(labels)


def _vote(dist: np.ndarray, train_labels: np.ndarray, k: int) -> np.ndarray:
    # Columns are in ascending training-row order, so a stable sort breaks
    # distance ties towards the lower row index.
    k = min(k, dist.shape[1])
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    votes = train_labels[nearest]
    pos = np.count_nonzero(votes == 1, axis=1)
    neg = k - pos
    out = np.where(pos > neg, 1, 0)
    tie = pos == neg
    out[tie] = votes[tie, 0]
    return out.astype(np.int8)


def knn_classify(train_codes: np.ndarray, train_labels: np.ndarray,
                 query_codes: np.ndarray, k: int = 3) -> np.ndarray:
    """Majority vote of the k Hamming-nearest training rows; a split vote takes the nearest row's label."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    train_codes = np.asarray(train_codes)
    if train_codes.shape[0] == 0:
        raise ParameterError("empty training set")
    dist = hamming_distances(np.asarray(query_codes), train_codes)
    return _vote(dist, np.asarray(train_labels), k)


def cross_validate(table: DecisionTable, attrs: Sequence[int], folds: int = 10,
                   repeats: int = 10, seed: int = 0, k: int = 3) -> float:
    """Mean k-NN accuracy over ``repeats`` shuffles of non-stratified ``folds``-fold CV."""
    attrs = list(attrs)
    if not attrs:
        raise ParameterError("cannot evaluate an empty attribute set")
    if folds < 2:
        raise ParameterError(f"folds must be >= 2, got {folds}")
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")
    n = table.n_rows
    if folds > n:
        raise ParameterError(f"folds ({folds}) exceed the number of rows ({n})")
    if not table.is_fully_labeled:
        raise ParameterError("cross-validation needs every row labeled")
    codes = table.codes[:, attrs]
    dist = hamming_distances(codes, codes)
    y = table.decision
    scores = []
    for r in range(repeats):
        perm = np.random.default_rng(derive_seed(seed, r)).permutation(n)
        for test in np.array_split(perm, folds):
            mask = np.ones(n, dtype=bool)
            mask[test] = False
            train = np.flatnonzero(mask)
            pred = _vote(dist[np.ix_(test, train)], y[train], k)
            scores.append(np.mean(pred == y[test]))
    return float(np.mean(scores))


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: str
    alphas: tuple[float, ...] = (0.1,)
    betas: tuple[float, ...] = (1.0,)
    repeats: int = 10
    folds: int = 10
    knn_k: int = 3
    methods: tuple[str, ...] = ("gce", "gce-l")
    epsilon: float = DEFAULT_EPSILON
    delta: int = DEFAULT_DELTA
    seed: int = 0
    bins: int | None = 3
    cv_repeats: int = 10
    laplacian_neighbors: int = DEFAULT_LAPLACIAN_NEIGHBORS
    prior_pos: float | None = None
    missing_token: str = "?"

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigurationError("repeats must be >= 1")
        if self.folds < 2:
            raise ConfigurationError("folds must be >= 2")
        if self.knn_k < 1:
            raise ConfigurationError("knn_k must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigurationError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if not self.methods:
            raise ConfigurationError("at least one method is required")


@dataclass(frozen=True)
class CellResult:
    dataset: str
    alpha: float
    beta: float
    repeat: int
    method: str
    accuracy: float
    reduct: tuple[int, ...]
    seconds: float = field(default=0.0, compare=False)

    @property
    def reduct_size(self) -> int:
        return len(self.reduct)


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    alpha: float
    beta: float
    method: str
    accuracy: float
    size_min: int
    size_max: int
    size_avg: float
    seconds: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    n_rows: int
    n_attributes: int
    prior_pos: float
    cells: tuple[CellResult, ...]

    def summary(self) -> list[SummaryRow]:
        groups: dict[tuple, list[CellResult]] = {}
        for c in self.cells:
            groups.setdefault((c.dataset, c.alpha, c.beta, c.method), []).append(c)
        rows = []
        for (ds, a, b, m), cs in groups.items():
            sizes = [c.reduct_size for c in cs]
            rows.append(SummaryRow(
                ds, a, b, m, float(np.mean([c.accuracy for c in cs])),
                min(sizes), max(sizes), float(np.mean(sizes)),
                float(sum(c.seconds for c in cs)),
            ))
        return rows

    def mean_accuracy(self, method: str, alpha: float | None = None) -> float:
        accs = [c.accuracy for c in self.cells
                if c.method == method and (alpha is None or c.alpha == alpha)]
        return float(np.mean(accs))


def resolve_dataset(dataset: str, base: Path | None = None) -> Path:
    path = Path(dataset)
    if base is not None and not path.is_absolute():
        path = base / path
    if path.exists():
        return path
    if dataset in BUILTIN_DATASETS:
        return Path(str(builtin_dataset_path(dataset)))
    raise ConfigurationError(f"dataset not found: {dataset}")


def _dataset_name(dataset: str) -> str:
    return Path(dataset).stem


def run_experiment(spec: ExperimentSpec, table: DecisionTable | None = None,
                   workers: int | None = None) -> ExperimentReport:
    """Run every (alpha, beta, repeat, method) cell and collect accuracies and reduct sizes.

    Reducts are derived on the split (with proxy labels for ``gce``); every
    evaluation uses the ground-truth labels.
    """
    if table is None:
        table = prepare_table(resolve_dataset(spec.dataset), spec.bins, spec.missing_token)
    if not table.is_fully_labeled:
        raise ConfigurationError("experiment datasets must be fully labeled (ground truth)")
    prior = prior_positive_probability(table, table) if spec.prior_pos is None \
        else prior_positive_probability(table, external=spec.prior_pos)
    params = ProxyParams(prior_pos=prior, epsilon=spec.epsilon, delta=spec.delta)
    name = _dataset_name(spec.dataset)
    gt_reduct: list[tuple[int, ...]] = []

    def ground_truth() -> tuple[int, ...]:
        if not gt_reduct:
            gt_reduct.append(reduce(table).selected)
        return gt_reduct[0]

    if "gt" in spec.methods:
        ground_truth()

    jobs = [(ai, a, bi, b, r) for ai, a in enumerate(spec.alphas)
            for bi, b in enumerate(spec.betas) for r in range(spec.repeats)]

    def run_cell(job) -> list[CellResult]:
        ai, alpha, bi, beta, r = job
        out = []
        context = f"alpha={alpha}, beta={beta}, repeat={r}"
        try:
            split = make_split(table, SplitSpec(alpha, beta, derive_seed(spec.seed, 0, r)))
        except GranredError as exc:
            raise type(exc)(f"{context}: {exc}") from exc
        cv_seed = derive_seed(spec.seed, 1, r)
        cache: dict[str, tuple[int, ...]] = {}

        def final_reduct():
            if "gce" not in cache:
                proxied, _ = assign_proxy_labels(split, params)
                cache["gce"] = reduce(proxied).selected
            return cache["gce"]

        for method in spec.methods:
            t0 = time.perf_counter()
            try:
                if method == "gce":
                    attrs = final_reduct()
                elif method == "gce-l":
                    attrs = gce_labeled_only(split).selected
                elif method == "fisher":
                    attrs = select_top_k(fisher_scores(split), len(final_reduct()))
                elif method == "laplacian":
                    attrs = select_top_k(laplacian_scores(split, spec.laplacian_neighbors),
                                         len(final_reduct()))
                elif method == "gt":
                    attrs = ground_truth()
                else:
                    attrs = tuple(range(table.n_attributes))
                acc = cross_validate(table, attrs, spec.folds, spec.cv_repeats,
                                     cv_seed, spec.knn_k)
            except GranredError as exc:
                raise type(exc)(f"{context}, method={method}: {exc}") from exc
            out.append(CellResult(name, alpha, beta, r, method, acc, tuple(attrs),
                                  time.perf_counter() - t0))
        return out

    results = _map(run_cell, jobs, worker_count(workers))
    cells = tuple(c for group in results for c in group)
    return ExperimentReport(spec, table.n_rows, table.n_attributes, prior, cells)


CELL_COLUMNS = ("dataset", "alpha", "beta", "repeat", "method", "accuracy",
                "reduct_size", "reduct")


def write_cells_csv(report: ExperimentReport, dest, attribute_names: Sequence[str] | None = None,
                    timings: bool = False) -> None:
    """One CSV row per (alpha, beta, repeat, method) cell.

    Wall time is left out unless ``timings`` is set, so that repeated runs
    produce identical files.
    """
    own = isinstance(dest, (str, os.PathLike))
    stream = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(CELL_COLUMNS + (("seconds",) if timings else ()))
        for c in report.cells:
            names = [attribute_names[a] for a in c.reduct] if attribute_names else list(map(str, c.reduct))
            row = [c.dataset, f"{c.alpha:g}", f"{c.beta:g}", c.repeat, c.method,
                   f"{c.accuracy:.6f}", c.reduct_size, ";".join(names)]
            if timings:
                row.append(f"{c.seconds:.4f}")
            w.writerow(row)
    finally:
        if own:
            stream.close()


def format_summary(report: ExperimentReport, timings: bool = False) -> str:
    """Plain-text tables: reduct sizes per method, then accuracy per positive ratio."""
    spec = report.spec
    rows = report.summary()
    buf = io.StringIO()
    name = _dataset_name(spec.dataset)
    buf.write(f"dataset {name}: |U|={report.n_rows} |C|={report.n_attributes} "
              f"P_pos={report.prior_pos:.4f}\n")
    buf.write(f"repeats={spec.repeats} folds={spec.folds} cv_repeats={spec.cv_repeats} "
              f"knn_k={spec.knn_k} epsilon={spec.epsilon:g} delta={spec.delta} seed={spec.seed}\n")
    label = lambda m: METHOD_LABELS.get(m, m)
    for alpha in spec.alphas:
        buf.write(f"\nreduct size, alpha={alpha:g} (min / max / avg over beta and repeats)\n")
        buf.write(f"  {'method':<10}{'min':>6}{'max':>6}{'avg':>9}\n")
        for m in spec.methods:
            sizes = [c.reduct_size for c in report.cells if c.alpha == alpha and c.method == m]
            buf.write(f"  {label(m):<10}{min(sizes):>6}{max(sizes):>6}{np.mean(sizes):>9.2f}\n")
        buf.write(f"\nmean accuracy, alpha={alpha:g}\n")
        buf.write(f"  {'beta':<6}" + "".join(f"{label(m):>11}" for m in spec.methods) + "\n")
        for beta in spec.betas:
            accs = {r.method: r for r in rows if r.alpha == alpha and r.beta == beta}
            buf.write(f"  {beta:<6g}" + "".join(f"{accs[m].accuracy:>11.4f}" for m in spec.methods)
                      + "\n")
        overall = [report.mean_accuracy(m, alpha) for m in spec.methods]
        buf.write(f"  {'avg':<6}" + "".join(f"{a:>11.4f}" for a in overall) + "\n")
    if timings:
        buf.write("\nwall time (s)\n")
        for r in rows:
            buf.write(f"  alpha={r.alpha:g} beta={r.beta:g} {label(r.method):<10}{r.seconds:>9.3f}\n")
    return buf.getvalue()


_LIST_KEYS = {"alphas": float, "betas": float, "methods": str}
_SCALAR_KEYS = {
    "dataset": str, "repeats": int, "folds": int, "knn_k": int, "epsilon": float,
    "delta": int, "seed": int, "bins": int, "cv_repeats": int,
    "laplacian_neighbors": int, "prior_pos": float, "missing_token": str,
}


def parse_config(text: str, base: Path | None = None) -> ExperimentSpec:
    """Parse ``key = value`` lines (``#`` comments, comma-separated lists).

    A relative ``dataset`` is resolved against ``base``; the names of the
    bundled datasets are accepted as well. ``bins = 0`` disables discretization.
    """
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split(sep, 1))
        key = key.replace("-", "_")
        try:
            if key in _LIST_KEYS:
                values[key] = tuple(_LIST_KEYS[key](v.strip()) for v in value.split(",") if v.strip())
            elif key in _SCALAR_KEYS:
                values[key] = _SCALAR_KEYS[key](value)
            else:
                raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigurationError(f"config line {lineno}: bad value for {key!r}: {value!r}") from None
    if "dataset" not in values:
        raise ConfigurationError("config is missing 'dataset'")
    values["dataset"] = str(resolve_dataset(str(values["dataset"]), base))
    if values.get("bins") == 0:
        values["bins"] = None
    return ExperimentSpec(**values)


def load_config(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent)
