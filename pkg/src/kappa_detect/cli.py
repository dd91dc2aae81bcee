"""Command-line interface.

Subcommands: gen (synthetic clouds), profile (kappa profile of a cloud),
threshold (leave-one-out threshold estimate), detect (classify unlabeled
points), eval (repeated randomized experiment with metrics and histogram).
All numeric report output is fixed at 6 decimals and every source of
randomness is controlled by --seed, so identical invocations produce
identical bytes.  Exit codes: 0 success, 1 I/O or data error, 2 usage
error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import datasets, harness
from .detector import (
    DetectionConfig,
    determine_threshold,
    format_outcomes,
    kappa_detect,
)
from .errors import (
    ConfigError,
    DegenerateSecantSetError,
    DimensionError,
    IngestError,
    InsufficientPointsError,
    KappaDetectError,
)
from .geometry import (
    FILTER_ABSOLUTE,
    FILTER_FRACTION,
    FILTER_NONE,
    PointCloud,
    SecantFilterPolicy,
)
from .profiles import DimensionRange, compute_kappa_profile, format_profile
from .solver import SolverConfig

_USAGE_ERRORS = (ConfigError, DimensionError, InsufficientPointsError)
_DATA_ERRORS = (IngestError, DegenerateSecantSetError, OSError)

GEN_KINDS = datasets.MANIFOLD_KINDS + ("gaussian_majority",)


def _parse_dims(text: str) -> DimensionRange:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return DimensionRange.span(int(lo), int(hi))
        return DimensionRange(tuple(int(p) for p in text.split(",")))
    except ValueError as exc:
        raise ConfigError(f"bad --dims value {text!r}: {exc}") from None


def _policy_from_args(args) -> SecantFilterPolicy:
    return SecantFilterPolicy(args.filter_mode, args.filter_value)


def _add_profile_options(sub, default_filter=FILTER_FRACTION, default_value=0.05):
    sub.add_argument("--dims", default=None, help="dimension range, e.g. 1..6 or 1,2,4")
    sub.add_argument("--trials", type=int, default=5, help="profiles averaged per estimate")
    sub.add_argument(
        "--filter-mode",
        choices=[FILTER_NONE, FILTER_ABSOLUTE, FILTER_FRACTION],
        default=default_filter,
    )
    sub.add_argument("--filter-value", type=float, default=default_value)
    sub.add_argument("--seed", type=int, default=0)


def _resolve_dims(args, ambient: int) -> DimensionRange:
    if args.dims is not None:
        dims = _parse_dims(args.dims)
        if dims.max_dim > ambient:
            raise ConfigError(
                f"--dims reaches {dims.max_dim} but the data has dimension {ambient}"
            )
        return dims
    return DimensionRange.up_to(min(ambient, 10))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kappa-detect",
        description="Rare-category detection from secant-projection dimension statistics.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a synthetic point cloud")
    gen.add_argument("kind", choices=GEN_KINDS)
    gen.add_argument("--count", type=int, required=True,
                     help="points to sample (per cluster for gaussian_majority)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True)

    prof = subs.add_parser("profile", help="kappa profile of a cloud file")
    prof.add_argument("input")
    _add_profile_options(prof)

    thr = subs.add_parser("threshold", help="leave-one-out threshold estimate")
    thr.add_argument("rare", help="cloud file of labeled rare points")
    thr.add_argument("--r", type=float, default=1.3, help="threshold multiplier")
    _add_profile_options(thr)

    det = subs.add_parser("detect", help="classify unlabeled points")
    det.add_argument("rare", help="cloud file of labeled rare points")
    det.add_argument("unlabeled", help="cloud file of points to classify")
    group = det.add_mutually_exclusive_group(required=True)
    group.add_argument("--threshold", type=float)
    group.add_argument("--auto-threshold-r", type=float)
    det.add_argument("--output", default=None, help="outcome file (default stdout)")
    det.add_argument("--refine-iters", type=int, default=100)
    det.add_argument("--jobs", type=int, default=1)
    _add_profile_options(det)

    ev = subs.add_parser("eval", help="repeated randomized detection experiment")
    ev.add_argument("data", help="dataset file")
    ev.add_argument("--preset", choices=sorted(datasets.UCI_PRESETS),
                    help="UCI file layout; omit for native cloud format")
    ev.add_argument("--rare-label", default=None)
    ev.add_argument("--n-labeled", type=int, required=True)
    ev.add_argument("--runs", type=int, default=10)
    ev.add_argument("--threshold", type=float, default=None)
    ev.add_argument("--auto-threshold-r", type=float, default=1.3)
    ev.add_argument("--majority-subsample", type=int, default=None)
    ev.add_argument("--exclude-rare-index", type=int, action="append", default=[],
                    help="cloud row index kept out of the labeled pool (repeatable)")
    ev.add_argument("--output", required=True, help="metrics report file")
    ev.add_argument("--histogram", default=None, help="optional histogram file")
    ev.add_argument("--histogram-bins", type=int, default=20)
    ev.add_argument("--refine-iters", type=int, default=100)
    ev.add_argument("--jobs", type=int, default=1)
    _add_profile_options(ev)
    return parser


def _warn_if_r_unusual(r: float) -> None:
    if not 1.1 <= r <= 1.5:
        print(
            f"warning: multiplier r={r:g} is outside the usual range [1.1, 1.5]",
            file=sys.stderr,
        )


def _cmd_gen(args) -> int:
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    if args.kind == "gaussian_majority":
        cloud = datasets.gen_gaussian_majority(args.count, args.seed)
    else:
        cloud = datasets.gen_manifold_samples(args.kind, args.count, args.seed)
    datasets.save_cloud(cloud, args.output)
    return 0


def _cmd_profile(args) -> int:
    cloud = datasets.load_cloud(args.input)
    dims = _resolve_dims(args, cloud.ambient_dim)
    profile = compute_kappa_profile(
        cloud, dims, args.trials, _policy_from_args(args), SolverConfig(seed=args.seed)
    )
    sys.stdout.write(format_profile(profile))
    return 0


def _cmd_threshold(args) -> int:
    cloud = datasets.load_cloud(args.rare)
    dims = _resolve_dims(args, cloud.ambient_dim)
    _warn_if_r_unusual(args.r)
    report = determine_threshold(
        cloud,
        dims,
        trials=args.trials,
        r=args.r,
        policy=_policy_from_args(args),
        cfg=SolverConfig(seed=args.seed),
    )
    sys.stdout.write(f"r {report.r:.6f}\n")
    sys.stdout.write(f"d_avg {report.d_avg:.6f}\n")
    sys.stdout.write(f"threshold {report.threshold:.6f}\n")
    sys.stdout.write(
        "per_point_distances "
        + " ".join(f"{d:.6f}" for d in report.per_point_distances)
        + "\n"
    )
    return 0


def _cmd_detect(args) -> int:
    rare = datasets.load_cloud(args.rare)
    unlabeled = datasets.load_cloud(args.unlabeled)
    if rare.ambient_dim != unlabeled.ambient_dim:
        raise DimensionError(
            f"rare data has dimension {rare.ambient_dim}, "
            f"unlabeled has {unlabeled.ambient_dim}"
        )
    dims = _resolve_dims(args, rare.ambient_dim)
    policy = _policy_from_args(args)
    solver = SolverConfig(seed=args.seed)
    if args.threshold is not None:
        threshold = args.threshold
    else:
        _warn_if_r_unusual(args.auto_threshold_r)
        threshold = determine_threshold(
            rare, dims, trials=args.trials, r=args.auto_threshold_r,
            policy=policy, cfg=solver, refine_iters=args.refine_iters,
        ).threshold
    cfg = DetectionConfig(
        threshold=threshold, dims=dims, trials=args.trials, policy=policy,
        solver=solver, refine_iters=args.refine_iters,
    )
    outcomes = kappa_detect(rare, unlabeled, cfg, jobs=args.jobs)
    text = format_outcomes(outcomes, unlabeled.labels)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval(args) -> int:
    if args.preset:
        cloud = datasets.load_delimited(args.data, datasets.UCI_PRESETS[args.preset])
        rare_label = args.rare_label or datasets.PRESET_RARE_LABELS[args.preset]
    else:
        cloud = datasets.load_cloud(args.data)
        if cloud.labels is None:
            raise ConfigError("native-format eval data must carry labels")
        if args.rare_label is None:
            raise ConfigError("--rare-label is required without a preset")
        rare_label = args.rare_label
    if args.threshold is None:
        _warn_if_r_unusual(args.auto_threshold_r)
    spec = harness.ExperimentSpec(
        rare_label=rare_label,
        n_labeled_rare=args.n_labeled,
        runs=args.runs,
        majority_subsample=args.majority_subsample,
        threshold=args.threshold,
        auto_threshold_r=args.auto_threshold_r,
        dims=_parse_dims(args.dims) if args.dims is not None else None,
        trials=args.trials,
        policy=_policy_from_args(args),
        solver=SolverConfig(seed=args.seed),
        refine_iters=args.refine_iters,
        master_seed=args.seed,
        exclude_rare=tuple(args.exclude_rare_index),
    )
    report = harness.run_experiment(cloud, spec, jobs=args.jobs)
    dims = spec.resolved_dims(cloud.ambient_dim)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(harness.format_report(report, spec, dims))
    if args.histogram:
        d_values = np.concatenate([d.d_values for d in report.details])
        truth = np.concatenate([d.truth_is_rare for d in report.details])
        hist = harness.export_histogram(d_values, truth, args.histogram_bins)
        with open(args.histogram, "w", encoding="utf-8") as fh:
            fh.write(harness.format_histogram(hist))
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "profile": _cmd_profile,
    "threshold": _cmd_threshold,
    "detect": _cmd_detect,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KappaDetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
