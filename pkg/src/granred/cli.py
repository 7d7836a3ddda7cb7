"""Command-line entry point: ``granred {discretize,label,reduce,evaluate,compare}``.

Exit codes: 0 success, 1 runtime error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from .errors import (
    ConfigurationError,
    FormatError,
    GranredError,
    ParameterError,
    SplitError,
)
from .harness import (
    METHODS,
    ExperimentSpec,
    format_summary,
    load_config,
    make_split,
    resolve_dataset,
    run_experiment,
    SplitSpec,
    write_cells_csv,
)
from .proxy import DEFAULT_DELTA, DEFAULT_EPSILON, ProxyDecision, ProxyParams, assign_proxy_labels, labeled_stats
from .reduction import DEFAULT_TOLERANCE, ReductTrace, reduce
from .tabular import (
    NEGATIVE_TOKEN,
    POSITIVE_TOKEN,
    DecisionTable,
    RawTable,
    binarize_one_vs_all,
    discretize_equal_frequency,
    encode,
    load_csv,
    prior_positive_probability,
    write_csv,
)

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message.replace("\n", " "))


def _table_flags(p: argparse.ArgumentParser, output_help: str) -> None:
    p.add_argument("--input", required=True, help="CSV file; last column is the decision")
    p.add_argument("--output", default="-", help=output_help)
    p.add_argument("--bins", type=int, default=3, help="equal-frequency bins for numeric columns")
    p.add_argument("--no-discretize", action="store_true",
                   help="treat every column as categorical")
    p.add_argument("--missing-label", default="?", help="decision token marking unlabeled rows")


def _proxy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prior-pos", type=float, default=None,
                   help="prior P_pos(U); computed from the labels when the input is fully labeled")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="boosting factor")
    p.add_argument("--delta", type=int, default=DEFAULT_DELTA, help="truncation threshold")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="granred", formatter_class=fmt,
                     description="Semi-supervised attribute reduction by granular conditional entropy.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("discretize", formatter_class=fmt,
                       help="equal-frequency binning of numeric columns")
    _table_flags(p, "output CSV ('-' for stdout)")

    p = sub.add_parser("label", formatter_class=fmt, help="assign proxy labels to unlabeled rows")
    _table_flags(p, "proxied CSV ('-' for stdout)")
    _proxy_flags(p)

    p = sub.add_parser("reduce", formatter_class=fmt, help="compute a reduct and write a JSON trace")
    _table_flags(p, "JSON report ('-' for stdout)")
    _proxy_flags(p)
    p.add_argument("--alpha", type=float, default=None,
                   help="label rate; hides labels of a fully labeled input before reducing")
    p.add_argument("--beta", type=float, default=1.0, help="positive ratio of the labeled set")
    p.add_argument("--seed", type=int, default=0, help="random seed for the split")
    p.add_argument("--no-accelerate", action="store_true", help="disable example/attribute pruning")
    p.add_argument("--enforce-min", action="store_true",
                   help="backward pass removing attributes that are not individually necessary")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                   help="absolute tolerance for GH equality tests")

    p = sub.add_parser("evaluate", formatter_class=fmt, help="run an experiment config file")
    p.add_argument("--config", required=True, help="key = value experiment file")
    p.add_argument("--output-dir", required=True, help="directory for cells.csv and summary.txt")
    p.add_argument("--timings", action="store_true",
                   help="add wall-time columns (makes reports run-dependent)")

    p = sub.add_parser("compare", formatter_class=fmt,
                       help="compare selectors on one dataset at one label rate")
    p.add_argument("--input", required=True, help="fully labeled CSV or a bundled dataset name")
    p.add_argument("--methods", default=",".join(METHODS), help="comma-separated methods")
    p.add_argument("--alpha", type=float, default=0.1, help="label rate")
    p.add_argument("--beta", default="1.0", help="positive ratio(s), comma-separated")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--repeats", type=int, default=10, help="splits per (alpha, beta)")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds")
    p.add_argument("--cv-repeats", type=int, default=10, help="shuffles of the cross-validation")
    p.add_argument("--knn-k", type=int, default=3, help="neighbors for k-NN")
    p.add_argument("--bins", type=int, default=3, help="equal-frequency bins (0 disables)")
    p.add_argument("--missing-label", default="?", help="decision token marking unlabeled rows")
    p.add_argument("--output-dir", default=None, help="also write cells.csv and summary.txt here")
    _proxy_flags(p)
    return parser


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8", newline="")


def _read_raw(args) -> RawTable:
    if not os.path.exists(args.input):
        raise ConfigurationError(f"input file not found: {args.input}")
    raw = load_csv(args.input, args.missing_label)
    if not args.no_discretize:
        raw = discretize_equal_frequency(raw, args.bins)
    return raw


def _proxy_params(args, table: DecisionTable, ground_truth: DecisionTable | None) -> ProxyParams:
    if args.prior_pos is not None:
        prior = prior_positive_probability(table, external=args.prior_pos)
    elif ground_truth is not None:
        prior = prior_positive_probability(ground_truth, ground_truth)
    elif table.is_fully_labeled:
        prior = prior_positive_probability(table, table)
    else:
        raise ConfigurationError("--prior-pos is required when the input has unlabeled rows")
    return ProxyParams(prior_pos=prior, epsilon=args.epsilon, delta=args.delta)


def _decoded(table: DecisionTable, raw: RawTable, missing_token: str) -> RawTable:
    tokens = {1: POSITIVE_TOKEN, 0: NEGATIVE_TOKEN}
    return RawTable(raw.attribute_names, raw.cells,
                    tuple(tokens.get(int(v)) for v in table.decision),
                    raw.decision_name, raw.positive_class)


def reduct_report(trace: ReductTrace, params: dict | None = None,
                  proxy: ProxyDecision | None = None) -> dict:
    names = trace.attribute_names or tuple(str(i) for i in range(max(trace.selected, default=-1) + 1))
    doc = {
        "reduct": [names[a] for a in trace.selected],
        "reduct_indices": list(trace.selected),
        "gh_full": trace.gh_full,
        "gh_final": trace.rounds[-1].gh_after if trace.rounds else None,
        "minimality_enforced": trace.minimality_enforced,
        "accelerated": trace.accelerated,
        "rounds": [
            {
                "attr": names[r.attribute],
                "attr_index": r.attribute,
                "sig": r.significance,
                "gh_after": r.gh_after,
                "pruned_examples": r.pruned_examples,
                "pruned_attributes": r.pruned_attributes,
                "forced": r.forced,
            }
            for r in trace.rounds
        ],
    }
    if trace.minimality_enforced:
        doc["greedy_reduct"] = [names[a] for a in trace.greedy_selected]
    if proxy is not None:
        doc["proxy"] = {"p_init": proxy.p_init, "p_prior": proxy.p_prior, "lambda": proxy.lam,
                        "label": "positive" if proxy.label else "negative",
                        "degenerate": proxy.degenerate}
    doc["params"] = dict(params or {})
    return doc


def emit_reduct_report(trace: ReductTrace, path, params: dict | None = None,
                       proxy: ProxyDecision | None = None) -> None:
    """Write the trace as JSON with a fixed key order."""
    text = json.dumps(reduct_report(trace, params, proxy), indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise GranredError(f"cannot write {path}: {exc.strerror}") from None


def _cmd_discretize(args) -> int:
    if args.no_discretize:
        raise ConfigurationError("--no-discretize makes 'discretize' a no-op")
    raw = _read_raw(args)
    out = _open_out(args.output)
    try:
        write_csv(raw, out, args.missing_label)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_label(args) -> int:
    raw = binarize_one_vs_all(_read_raw(args))
    table = encode(raw)
    params = _proxy_params(args, table, None)
    proxied, decision = assign_proxy_labels(table, params)
    out = _open_out(args.output)
    try:
        write_csv(_decoded(proxied, raw, args.missing_label), out, args.missing_label)
    finally:
        if out is not sys.stdout:
            out.close()
    line = f"{decision.summary(labeled_stats(table))} unlabeled={table.n_unlabeled}"
    print(line, file=sys.stderr if args.output == "-" else sys.stdout)
    return EXIT_OK


def _cmd_reduce(args) -> int:
    table = encode(binarize_one_vs_all(_read_raw(args)))
    truth = None
    if args.alpha is not None:
        if not table.is_fully_labeled:
            raise ConfigurationError("--alpha needs a fully labeled input to split")
        truth = table
        table = make_split(truth, SplitSpec(args.alpha, args.beta, args.seed))
    decision = None
    if not table.is_fully_labeled:
        params = _proxy_params(args, table, truth)
        table, decision = assign_proxy_labels(table, params)
    trace = reduce(table, accelerate=not args.no_accelerate, enforce_min=args.enforce_min,
                   tolerance=args.tolerance)
    echo = {
        "input": os.path.basename(args.input),
        "bins": None if args.no_discretize else args.bins,
        "prior_pos": args.prior_pos,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "alpha": args.alpha,
        "beta": args.beta,
        "seed": args.seed,
        "tolerance": args.tolerance,
        "accelerate": not args.no_accelerate,
        "enforce_min": args.enforce_min,
    }
    emit_reduct_report(trace, args.output, echo, decision)
    return EXIT_OK


def _write_reports(report, out_dir: str, timings: bool, names) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cells_csv(report, out / "cells.csv", names, timings=timings)
    (out / "summary.txt").write_text(format_summary(report, timings), encoding="utf-8")


def _cmd_evaluate(args) -> int:
    spec = load_config(args.config)
    report = run_experiment(spec)
    names = load_csv(spec.dataset, spec.missing_token).attribute_names
    _write_reports(report, args.output_dir, args.timings, names)
    sys.stdout.write(format_summary(report, args.timings))
    return EXIT_OK


def _cmd_compare(args) -> int:
    try:
        betas = tuple(float(b) for b in args.beta.split(",") if b.strip())
    except ValueError:
        raise ConfigurationError(f"bad --beta value {args.beta!r}") from None
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    spec = ExperimentSpec(
        dataset=str(resolve_dataset(args.input)), alphas=(args.alpha,), betas=betas,
        repeats=args.repeats, folds=args.folds, knn_k=args.knn_k, methods=methods,
        epsilon=args.epsilon, delta=args.delta, seed=args.seed,
        bins=args.bins or None, cv_repeats=args.cv_repeats, prior_pos=args.prior_pos,
        missing_token=args.missing_label,
    )
    report = run_experiment(spec)
    if args.output_dir:
        names = load_csv(spec.dataset, spec.missing_token).attribute_names
        _write_reports(report, args.output_dir, False, names)
    sys.stdout.write(format_summary(report))
    return EXIT_OK


_COMMANDS = {
    "discretize": _cmd_discretize,
    "label": _cmd_label,
    "reduce": _cmd_reduce,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv`` and dispatch; errors become a one-line diagnostic and an exit code."""
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (ConfigurationError, ParameterError, SplitError) as exc:
        print(f"granred: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as exc:
        print(f"granred: format error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except GranredError as exc:
        print(f"granred: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"granred: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
