"""Command-line interface.

Exit codes: 0 on success, 2 for invalid arguments, 3 for data errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional

from . import simgen
from . import _rng
from .benchmark import CLUSTER_METHODS, SUITES, RunOptions, cluster, estimate, run_benchmark
from .core import DataError, Dataset, load_csv, save_csv
from .indices import METHODS as INDEX_METHODS
from .report import evaluate
from .sampling import EPSILON, Z_95, plan_sample_size

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


def _fraction(text: str):
    if text == "auto":
        return "auto"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number in (0, 1], got {text!r}")
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"sample fraction must be in (0, 1], got {v}")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer seed, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _seed_list(text: str) -> list:
    """``"0-9"``, ``"0,3,5"`` or a mix."""
    seeds = []
    try:
        for part in filter(None, (p.strip() for p in text.split(","))):
            if "-" in part:
                a, b = part.split("-", 1)
                seeds.extend(range(int(a), int(b) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}")
    if not seeds or min(seeds) < 0:
        raise argparse.ArgumentTypeError(f"seed list must name non-negative seeds, got {text!r}")
    return seeds


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand. The copy on
    # each subcommand suppresses defaults so it cannot overwrite a value
    # given before the subcommand.
    def default(v):
        return argparse.SUPPRESS if suppress else v

    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=_seed, default=default(0))
    g.add_argument("--threads", type=_positive, default=default(1))
    g.add_argument("--input", default=default(None),
                   help="input CSV (one point per row, optional trailing 'label' column)")
    g.add_argument("--output", default=default(None),
                   help="output path (JSON report, CSV, or directory for benchmark)")
    g.add_argument("--delimiter", default=default(","))
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="cnak", parents=[_global_flags(suppress=False)],
                                description="Cluster-number estimation and clustering toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample-size", parents=[common], help="print the sample-size plan as JSON")
    s.add_argument("--tau", type=_positive)
    s.add_argument("--epsilon", type=float, default=EPSILON)
    s.add_argument("--z-beta", type=float, default=Z_95)

    s = sub.add_parser("simulate", parents=[common], help="write a synthetic dataset as CSV")
    s.add_argument("--sim", required=True, help="one of " + ", ".join(simgen.SIM_IDS) + ", or dimD")
    s.add_argument("--out", help="output CSV (same as --output)")
    s.add_argument("--per-cluster", type=_positive, help="cluster size override for sim10/sim11")
    s.add_argument("--noise", choices=("cov_scale", "snr"))
    s.add_argument("--noise-level", type=float)

    def scan_flags(sp):
        sp.add_argument("--k-min", type=_positive)
        sp.add_argument("--k-max", type=_positive, default=10)
        sp.add_argument("--trials", type=_positive)
        sp.add_argument("--sample-fraction", type=_fraction, default="auto")
        sp.add_argument("--tau", type=_positive)

    s = sub.add_parser("estimate-k", parents=[common], help="predict the number of clusters")
    s.add_argument("--method", choices=("cnak", *INDEX_METHODS), default="cnak")
    scan_flags(s)
    s.add_argument("--restarts", type=_positive, default=5)
    s.add_argument("--B", type=_positive, default=10, help="gap reference datasets")
    s.add_argument("--C", type=_positive, default=10, help="CVa permutations")
    s.add_argument("--curve", help="CSV path for the k-vs-score curve")

    s = sub.add_parser("cluster", parents=[common], help="partition the data")
    s.add_argument("--method", choices=CLUSTER_METHODS, default="cnak")
    scan_flags(s)
    s.add_argument("--k", type=_positive, help="cluster count for ba, rpkm and rs")
    s.add_argument("--depth", type=_positive, default=4, help="rpkm grid depth")
    s.add_argument("--samples", type=_positive, default=10, help="rs sample count")
    s.add_argument("--labels-out", help="write predicted labels, one per line")

    s = sub.add_parser("evaluate", parents=[common], help="compare predicted and true labels")
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--k-true", type=_positive)
    s.add_argument("--k-pred", type=_positive)

    s = sub.add_parser("benchmark", parents=[common], help="run a benchmark suite")
    s.add_argument("--suite", choices=SUITES, required=True)
    s.add_argument("--seeds", type=_seed_list, default=list(range(10)))
    s.add_argument("--methods", help="comma-separated subset of methods")
    s.add_argument("--trials", type=_positive)
    return p


def _load_input(args) -> Dataset:
    if not args.input:
        raise UsageError("--input is required")
    return load_csv(args.input, delimiter=args.delimiter)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        try:
            Path(path).write_text(text + "\n")
        except OSError as exc:
            raise DataError(f"cannot write {path}: {exc}") from None
    else:
        print(text)


def _options(args) -> RunOptions:
    return RunOptions(
        k_min=args.k_min, k_max=args.k_max, trials=args.trials,
        sample_fraction=args.sample_fraction, tau=args.tau, threads=args.threads,
        restarts=getattr(args, "restarts", 5), k=getattr(args, "k", None),
        depth=getattr(args, "depth", 4), samples=getattr(args, "samples", 10),
        B=getattr(args, "B", 10), C=getattr(args, "C", 10),
    )


def _write_curve(report, path: str) -> None:
    c = report.curve
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "score", "score_per_k"])
        if report.method == "cnak":
            for k, raw, per_k in zip(c["ks"], c["raw"], c["per_k"]):
                w.writerow([k, repr(raw), repr(per_k)])
        else:
            for k, v in zip(c["ks"], c["values"]):
                w.writerow([k, "" if v is None else repr(v), "" if v is None else repr(v / k)])


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    if cmd == "sample-size":
        plan = plan_sample_size(_load_input(args), args.tau, args.epsilon, args.z_beta)
        _emit(json.dumps(plan.to_dict(), indent=2, sort_keys=True), args.output)
    elif cmd == "simulate":
        out = args.out or args.output
        if not out:
            raise UsageError("simulate needs --out or --output")
        data = simgen.generate(args.sim, seed=args.seed, per_cluster=args.per_cluster)
        if args.noise:
            if args.noise_level is None:
                raise UsageError("--noise needs --noise-level")
            data = simgen.add_noise(data, args.noise, args.noise_level, _rng.stream(args.seed, _rng.NOISE))
        save_csv(data, out, args.delimiter)
    elif cmd == "estimate-k":
        report = estimate(_load_input(args), args.method, args.seed, _options(args))
        _emit(report.to_json(), args.output)
        curve_path = args.curve or (str(Path(args.output).with_suffix("")) + "_curve.csv" if args.output else None)
        if curve_path:
            _write_curve(report, curve_path)
    elif cmd == "cluster":
        report = cluster(_load_input(args), args.method, args.seed, _options(args))
        _emit(report.to_json(), args.output)
        if args.labels_out:
            Path(args.labels_out).write_text("".join(f"{v}\n" for v in report.labels))
    elif cmd == "evaluate":
        data = load_csv(args.input, delimiter=args.delimiter) if args.input else None
        metrics = evaluate(args.pred, args.truth, args.k_true, args.k_pred, data, args.delimiter)
        _emit(json.dumps({"metrics": metrics}, indent=2, sort_keys=True), args.output)
    elif cmd == "benchmark":
        if not args.output:
            raise UsageError("benchmark needs --output DIR")
        methods = args.methods.split(",") if args.methods else None
        reports = run_benchmark(args.suite, args.seeds, args.output, args.threads, methods, args.trials)
        print(f"{len(reports)} runs written to {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:  # argparse reports usage errors with exit code 2
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
