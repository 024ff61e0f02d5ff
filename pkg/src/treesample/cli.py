"""Command-line front end.

Subcommands: ``optimal`` (scale-recursive water-filling selection),
``survey`` (random-pattern comparison on covariance trees), ``bruteforce``
(exhaustive subset extremes), ``synthesize`` (midpoint-displacement paths)
and ``benchmark`` (timing plus self-verification).

Tabular per-n results are written as CSV, structured reports as JSON; every
output file embeds a run manifest, and the payload section depends only on
the manifest inputs, so reruns are byte-identical.  ``--plot`` additionally
renders a figure next to the output file.  Exit codes: 0 success, 2
configuration error, 3 domain error, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .addresses import ROOT, LeafSet
from .config import load_tree_config
from .errors import CapExceededError, ConfigError, DomainError, TreeSampleError
from .estimator import lmmse
from .oracle import (DEFAULT_SUBSET_CAP, brute_force_extremes, q_sum,
                     random_pattern_survey, row_sum_eigen_check)
from .synthesis import synthesize_midpoint_path
from .trees import CovarianceTree, build_innovations_tree, matched_innovations_tree
from .waterfill import optimal_leaf_sets


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _parse_n_range(text):
    parts = text.split("..")
    if len(parts) != 2:
        raise ConfigError(f"--n-range expects A..B, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"--n-range expects integers, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise ConfigError(f"--n-range bounds must satisfy 0 <= A <= B, got {text!r}")
    return lo, hi


def _manifest(command, args, duration):
    flags = {}
    skip = {"func", "command"}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        flags[key] = str(value) if isinstance(value, Path) else value
    return {
        "command": command,
        "config": str(args.tree) if getattr(args, "tree", None) else None,
        "seed": getattr(args, "seed", None),
        "flags": flags,
        "version": __version__,
        "duration_seconds": duration,
    }


def _write_csv(path, manifest, header, rows):
    lines = ["# manifest: " + json.dumps(manifest, sort_keys=True)]
    lines.append(",".join(header))
    lines.extend(",".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path, manifest, result):
    doc = {"manifest": manifest, "result": result}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _plot_target(out_path):
    out = Path(out_path)
    return out.with_suffix(out.suffix + ".png") if out.suffix == ".png" \
        else out.with_suffix(".png")


# -- subcommands -------------------------------------------------------------


def cmd_optimal(args):
    start = time.perf_counter()
    model = load_tree_config(args.tree)
    if args.n is not None:
        ns = [args.n]
    else:
        lo, hi = _parse_n_range(args.n_range)
        ns = list(range(lo, hi + 1))
    total = len(model.leaves)
    if ns[-1] > total:
        raise DomainError(f"requested n up to {ns[-1]} but the tree has {total} leaves")

    if isinstance(model, CovarianceTree):
        # Selection happens on the matched innovations tree; evaluation on the
        # covariance tree itself.
        matched = matched_tree_or_guidance(model)
        selections = optimal_leaf_sets(matched, ns[-1])
        var = model.root_variance
        per_n = {0: (LeafSet(), var)}
        for i, (leaf_set, _) in enumerate(selections, start=1):
            per_n[i] = (leaf_set, lmmse(model, ROOT, leaf_set).lmmse)
    else:
        selections = optimal_leaf_sets(model, ns[-1])
        var = model.variance(ROOT)
        per_n = {0: (LeafSet(), var)}
        for i, (leaf_set, value) in enumerate(selections, start=1):
            per_n[i] = (leaf_set, value)

    rows = []
    plotted = []
    for n in ns:
        leaf_set, value = per_n[n]
        rows.append((str(n), _fmt(value), _fmt(value / var),
                     ";".join(leaf_set.labels())))
        plotted.append((n, leaf_set.labels()))
    manifest = _manifest("optimal", args, time.perf_counter() - start)
    _write_csv(args.out, manifest, ("n", "lmmse", "normalized_lmmse", "leaves"), rows)
    if args.plot:
        from . import plots
        plots.render_optimal_sets(_plot_target(args.out),
                                  [str(a) for a in model.leaves], plotted)
    return 0


def matched_tree_or_guidance(model):
    try:
        return matched_innovations_tree(model)
    except DomainError as exc:
        raise DomainError(
            f"{exc}; optimal selection needs positive correlation progression — "
            "use the survey command to explore this model instead") from None


def cmd_survey(args):
    model = load_tree_config(args.tree)
    if not isinstance(model, CovarianceTree):
        raise DomainError("survey runs on covariance-tree configurations")
    start = time.perf_counter()
    keep = bool(args.histogram or args.plot)
    result = random_pattern_survey(model, args.n, args.trials, args.seed,
                                   keep_values=keep)
    duration = time.perf_counter() - start
    payload = {
        "n": result.n,
        "trials": result.trials,
        "seed": result.seed,
        "uniform": {"normalized_lmmse": result.lmmse_uniform,
                    "leaves": result.uniform_set.labels()},
        "clustered": {"normalized_lmmse": result.lmmse_clustered,
                      "leaves": result.clustered_set.labels()},
        "random_min": result.random_min,
        "random_max": result.random_max,
        "random_mean": result.random_mean,
    }
    if args.histogram:
        payload["histogram"] = ([] if result.trial_values is None
                                else [float(v) for v in result.trial_values])
    _write_json(args.out, _manifest("survey", args, duration), payload)
    if args.plot:
        from . import plots
        plots.render_survey(_plot_target(args.out), result, result.trial_values)
    return 0


def cmd_bruteforce(args):
    model = load_tree_config(args.tree)
    start = time.perf_counter()
    result = brute_force_extremes(model, args.n, cap=args.cap)
    duration = time.perf_counter() - start
    var = model.variance(ROOT)

    def side(leaf_set, value):
        entry = {"leaves": leaf_set.labels(), "lmmse": value,
                 "normalized_lmmse": value / var}
        if isinstance(model, CovarianceTree) and leaf_set:
            constant, row_sum = row_sum_eigen_check(model, leaf_set)
            entry["q_sum"] = q_sum(model, leaf_set)
            entry["row_sums_constant"] = constant
            entry["row_sum_eigenvalue"] = row_sum
        return entry

    payload = {
        "n": result.n,
        "best": side(result.best_set, result.best_lmmse),
        "worst": side(result.worst_set, result.worst_lmmse),
    }
    _write_json(args.out, _manifest("bruteforce", args, duration), payload)
    return 0


def cmd_synthesize(args):
    if args.brownian and args.hurst is not None:
        raise ConfigError("choose one of --brownian or --hurst, not both")
    if not args.brownian and args.hurst is None:
        raise ConfigError("choose a schedule: --brownian or --hurst H")
    start = time.perf_counter()
    result = synthesize_midpoint_path(args.depth, hurst=args.hurst,
                                      brownian=args.brownian, paths=args.paths,
                                      seed=args.seed)
    duration = time.perf_counter() - start
    rows = []
    for p in range(result.increments.shape[0]):
        for step in range(result.increments.shape[1]):
            rows.append((str(p), str(step + 1),
                         _fmt(result.increments[p, step]),
                         _fmt(result.cumulative[p, step])))
    manifest = _manifest("synthesize", args, duration)
    _write_csv(args.out, manifest, ("path_id", "step", "increment", "cumulative"),
               rows)
    if args.plot:
        from . import plots
        plots.render_paths(_plot_target(args.out), result.cumulative)
    return 0


_BENCHMARK_MAX_DEPTH = 20


def cmd_benchmark(args):
    if args.depth > _BENCHMARK_MAX_DEPTH:
        raise CapExceededError(
            f"benchmark depth guardrail is {_BENCHMARK_MAX_DEPTH}, got {args.depth}")
    if args.depth < 1:
        raise ConfigError("benchmark depth must be >= 1")
    t0 = time.perf_counter()
    tree = build_innovations_tree({
        "type": "innovations",
        "root_variance": 1.0,
        "scales": [{"branching": 2, "rho": 1.0, "innovation_variance": 1.0}
                   for _ in range(args.depth)],
    })
    t1 = time.perf_counter()
    selections = optimal_leaf_sets(tree, args.n)
    t2 = time.perf_counter()

    leaf_set, value = selections[-1]
    direct = lmmse(tree, ROOT, leaf_set).lmmse
    relative_error = float(abs(direct - value) / max(abs(value), 1e-300))
    verified = bool(relative_error <= 1e-9)
    payload = {
        "depth": args.depth,
        "n": args.n,
        "leaf_count": len(tree.leaves),
        "build_seconds": t1 - t0,
        "solve_seconds": t2 - t1,
        "lmmse": value,
        "normalized_lmmse": value / tree.root_variance,
        "direct_lmmse": direct,
        "relative_error": relative_error,
        "verified": verified,
    }
    _write_json(args.out, _manifest("benchmark", args, t2 - t0), payload)
    if not verified:
        raise DomainError(
            f"benchmark self-check failed: relative error {relative_error}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="treesample",
        description="Optimal leaf sampling for multiscale stochastic tree models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimal", help="optimal leaf sets via water-filling")
    p.add_argument("--tree", required=True, type=Path, help="tree config JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, help="single sample size")
    group.add_argument("--n-range", help="inclusive range A..B of sample sizes")
    p.add_argument("--out", required=True, type=Path, help="output CSV path")
    p.add_argument("--plot", action="store_true", help="render a PNG figure too")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("survey", help="random-pattern LMMSE survey")
    p.add_argument("--tree", required=True, type=Path)
    p.add_argument("--n", required=True, type=int, help="sample size")
    p.add_argument("--trials", type=int, default=10000, help="random patterns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path, help="output JSON path")
    p.add_argument("--histogram", action="store_true",
                   help="include every trial value in the output")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("bruteforce", help="exhaustive best/worst subsets")
    p.add_argument("--tree", required=True, type=Path)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--cap", type=int, default=DEFAULT_SUBSET_CAP,
                   help="maximum number of subsets to enumerate")
    p.add_argument("--out", required=True, type=Path, help="output JSON path")
    p.set_defaults(func=cmd_bruteforce)

    p = sub.add_parser("synthesize", help="midpoint-displacement path synthesis")
    p.add_argument("--depth", required=True, type=int)
    p.add_argument("--brownian", action="store_true")
    p.add_argument("--hurst", type=float)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path, help="output CSV path")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("benchmark", help="timed depth-D selection with self-check")
    p.add_argument("--depth", required=True, type=int)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--out", required=True, type=Path, help="output JSON path")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CapExceededError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 4
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except TreeSampleError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
