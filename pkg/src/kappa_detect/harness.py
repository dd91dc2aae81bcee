"""Repeated randomized detection experiments and summary metrics.

Each run draws a fresh labeled rare sample from a labeled cloud, treats
everything else as unlabeled, runs detection with either a fixed or a
leave-one-out threshold, and records the percentage of unlabeled rare
points identified and of majority points misidentified as rare.  All
randomness descends from a single master seed, so reports are reproducible
byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .detector import (
    RARE,
    DetectionConfig,
    DetectionOutcome,
    determine_threshold,
    kappa_detect,
)
from .errors import ConfigError, DegenerateSecantSetError, InsufficientPointsError
from .geometry import PointCloud, SecantFilterPolicy
from .profiles import DimensionRange
from .solver import SolverConfig, derive_seed

_THRESHOLD_STAGE = 1
_DETECT_STAGE = 2


@dataclass(frozen=True)
class ExperimentSpec:
    """Configuration of a repeated random-partition experiment.

    Exactly one of `threshold` (fixed) or `auto_threshold_r` (leave-one-out
    multiplier) drives the decision rule; `threshold` wins when both are
    set.  `exclude_rare` lists cloud row indices of known-bad rare points
    that must never enter the labeled pool (they stay in the unlabeled set).
    When `dims` is omitted a feasible default is chosen per run: 1 up to
    min(ambient, 10), further capped so the labeled pool can support the
    profile (and its leave-one-out variant when the threshold is automatic).
    """

    rare_label: str
    n_labeled_rare: int
    runs: int = 10
    majority_subsample: int | None = None
    threshold: float | None = None
    auto_threshold_r: float = 1.3
    dims: DimensionRange | None = None
    trials: int = 5
    policy: SecantFilterPolicy = SecantFilterPolicy.drop_shortest_fraction(0.05)
    solver: SolverConfig = SolverConfig()
    refine_iters: int = 100
    master_seed: int = 0
    exclude_rare: tuple[int, ...] = ()

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.n_labeled_rare < 2:
            raise ConfigError("n_labeled_rare must be >= 2")
        if self.majority_subsample is not None and self.majority_subsample < 1:
            raise ConfigError("majority_subsample must be positive")

    def resolved_dims(self, ambient_dim: int) -> DimensionRange:
        if self.dims is not None:
            return self.dims
        cap = min(ambient_dim, 10, self.n_labeled_rare - 1)
        if self.threshold is None:
            cap = min(cap, self.n_labeled_rare - 2)
        if cap < 1:
            raise ConfigError("labeled pool too small to support any dimension")
        return DimensionRange.up_to(cap)


@dataclass
class RunDetail:
    """Everything recorded for one run of the experiment."""

    run_index: int
    threshold: float
    labeled_indices: tuple[int, ...]
    unlabeled_indices: tuple[int, ...]
    d_values: np.ndarray
    predicted_rare: np.ndarray
    truth_is_rare: np.ndarray
    pct_rare_identified: float
    pct_majority_misidentified: float


@dataclass
class MetricsReport:
    """Means over runs of the two detection percentages."""

    pct_rare_identified: float
    pct_majority_misidentified: float
    per_run: tuple[tuple[float, float], ...]
    n_labeled_rare: int
    details: tuple[RunDetail, ...] = field(repr=False, default=())

    def __post_init__(self):
        for rare_pct, maj_pct in self.per_run:
            if not (0.0 <= rare_pct <= 100.0 and 0.0 <= maj_pct <= 100.0):
                raise ValueError("percentages must lie in [0, 100]")


@dataclass
class Histogram:
    """Aligned per-class bin counts of the detection statistic."""

    bin_edges: np.ndarray
    rare_counts: np.ndarray
    majority_counts: np.ndarray


def run_experiment(
    cloud: PointCloud, spec: ExperimentSpec, jobs: int = 1
) -> MetricsReport:
    """Run the repeated random-partition experiment on a labeled cloud.

    Per run: a seeded random choice of labeled rare points, optional
    majority subsampling of the unlabeled pool, threshold determination
    (fixed or leave-one-out), detection, and the two percentages.  Run i
    uses the RNG stream derive_seed(master_seed, i).
    """
    if cloud.labels is None:
        raise ConfigError("experiment cloud must carry labels")
    labels = np.asarray(cloud.labels)
    rare_idx = np.flatnonzero(labels == spec.rare_label)
    if len(rare_idx) == 0:
        raise ConfigError(f"no points labeled {spec.rare_label!r}")
    if len(rare_idx) <= spec.n_labeled_rare:
        raise ConfigError(
            f"rare class has {len(rare_idx)} points, cannot label "
            f"{spec.n_labeled_rare} and keep some unlabeled"
        )
    excluded = set(spec.exclude_rare)
    eligible = np.asarray([i for i in rare_idx if i not in excluded], dtype=int)
    if len(eligible) < spec.n_labeled_rare:
        raise ConfigError("exclusions leave too few rare points to label")
    dims = spec.resolved_dims(cloud.ambient_dim)

    details = []
    for run in range(spec.runs):
        run_seed = derive_seed(spec.master_seed, run)
        rng = np.random.default_rng(run_seed)
        labeled = np.sort(rng.choice(eligible, size=spec.n_labeled_rare, replace=False))
        labeled_set = set(int(i) for i in labeled)
        rest = np.asarray(
            [i for i in range(cloud.count) if i not in labeled_set], dtype=int
        )
        is_rare_rest = labels[rest] == spec.rare_label
        if spec.majority_subsample is not None:
            maj = rest[~is_rare_rest]
            if len(maj) > spec.majority_subsample:
                maj = np.sort(
                    rng.choice(maj, size=spec.majority_subsample, replace=False)
                )
            unlabeled_idx = np.sort(np.concatenate([rest[is_rare_rest], maj]))
        else:
            unlabeled_idx = rest
        truth = labels[unlabeled_idx] == spec.rare_label
        n_rare = int(truth.sum())
        n_maj = int(len(truth) - n_rare)
        if n_rare == 0 or n_maj == 0:
            raise ConfigError("each run needs unlabeled points of both classes")

        rare_cloud = cloud.subset(labeled)
        if spec.threshold is not None:
            threshold = float(spec.threshold)
        else:
            report = determine_threshold(
                rare_cloud,
                dims,
                trials=spec.trials,
                r=spec.auto_threshold_r,
                policy=spec.policy,
                cfg=replace(spec.solver, seed=derive_seed(run_seed, _THRESHOLD_STAGE)),
                refine_iters=spec.refine_iters,
            )
            threshold = report.threshold
        det_cfg = DetectionConfig(
            threshold=threshold,
            dims=dims,
            trials=spec.trials,
            policy=spec.policy,
            solver=replace(spec.solver, seed=derive_seed(run_seed, _DETECT_STAGE)),
            refine_iters=spec.refine_iters,
        )
        outcomes = kappa_detect(rare_cloud, cloud.subset(unlabeled_idx), det_cfg, jobs=jobs)
        predicted = np.asarray([o.predicted == RARE for o in outcomes])
        d_values = np.asarray([o.d_y for o in outcomes])
        tp = int(np.count_nonzero(predicted & truth))
        fp = int(np.count_nonzero(predicted & ~truth))
        details.append(
            RunDetail(
                run_index=run,
                threshold=threshold,
                labeled_indices=tuple(int(i) for i in labeled),
                unlabeled_indices=tuple(int(i) for i in unlabeled_idx),
                d_values=d_values,
                predicted_rare=predicted,
                truth_is_rare=truth,
                pct_rare_identified=100.0 * tp / n_rare,
                pct_majority_misidentified=100.0 * fp / n_maj,
            )
        )

    per_run = tuple(
        (d.pct_rare_identified, d.pct_majority_misidentified) for d in details
    )
    return MetricsReport(
        pct_rare_identified=float(np.mean([p for p, _ in per_run])),
        pct_majority_misidentified=float(np.mean([m for _, m in per_run])),
        per_run=per_run,
        n_labeled_rare=spec.n_labeled_rare,
        details=tuple(details),
    )


def export_histogram(
    outcomes: list[DetectionOutcome] | np.ndarray,
    truth_is_rare,
    bins: int,
) -> Histogram:
    """Bin d_y values per true class over equal-width bins on [0, max d_y].

    Accepts detection outcomes or a plain array of d_y values.  Counts sum
    to the respective class sizes.
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    if len(outcomes) == 0:
        raise ValueError("no outcomes to bin")
    if isinstance(outcomes, np.ndarray):
        d = np.asarray(outcomes, dtype=np.float64)
    else:
        d = np.asarray([o.d_y for o in outcomes], dtype=np.float64)
    truth = np.asarray(truth_is_rare, dtype=bool)
    if truth.shape != d.shape:
        raise ValueError("truth flags must match outcomes")
    hi = float(d.max())
    if hi <= 0.0:
        hi = 1.0  # all-zero statistics still get a well-formed axis
    edges = np.linspace(0.0, hi, bins + 1)
    rare_counts, _ = np.histogram(d[truth], bins=edges)
    maj_counts, _ = np.histogram(d[~truth], bins=edges)
    return Histogram(edges, rare_counts, maj_counts)


def singular_value_profile(cloud: PointCloud) -> np.ndarray:
    """Singular values of the centered data matrix, scaled to start at 1.

    This is the linear (PCA-style) analogue of the kappa profile; comparing
    the two shows what the nonlinear statistic sees that the spectrum does
    not.
    """
    if cloud.count < 2:
        raise InsufficientPointsError("need at least 2 points")
    centered = cloud.points - cloud.points.mean(axis=0)
    values = np.linalg.svd(centered, compute_uv=False)
    if values[0] == 0.0:
        raise DegenerateSecantSetError("all points are identical")
    return values / values[0]


def format_report(report: MetricsReport, spec: ExperimentSpec, dims: DimensionRange) -> str:
    """Deterministic key/value header plus one row per run (6 decimals)."""
    lines = [
        f"rare_label {spec.rare_label}",
        f"n_labeled_rare {spec.n_labeled_rare}",
        f"runs {spec.runs}",
        f"majority_subsample {spec.majority_subsample if spec.majority_subsample else 'none'}",
        f"threshold_mode {'fixed' if spec.threshold is not None else 'auto'}",
    ]
    if spec.threshold is not None:
        lines.append(f"threshold {spec.threshold:.6f}")
    else:
        lines.append(f"auto_threshold_r {spec.auto_threshold_r:.6f}")
    lines += [
        "dims " + " ".join(str(d) for d in dims),
        f"trials {spec.trials}",
        f"filter_mode {spec.policy.mode}",
        f"filter_value {spec.policy.value:.6f}",
        f"master_seed {spec.master_seed}",
        f"excluded_rare {' '.join(str(i) for i in spec.exclude_rare) if spec.exclude_rare else 'none'}",
        f"pct_rare_identified {report.pct_rare_identified:.6f}",
        f"pct_majority_misidentified {report.pct_majority_misidentified:.6f}",
        "run pct_rare_identified pct_majority_misidentified threshold",
    ]
    for detail in report.details:
        lines.append(
            f"{detail.run_index} {detail.pct_rare_identified:.6f} "
            f"{detail.pct_majority_misidentified:.6f} {detail.threshold:.6f}"
        )
    return "\n".join(lines) + "\n"


def format_histogram(hist: Histogram) -> str:
    """Delimited rows: bin_lo bin_hi rare_count majority_count."""
    lines = ["bin_lo bin_hi rare_count majority_count"]
    for i in range(len(hist.rare_counts)):
        lines.append(
            f"{hist.bin_edges[i]:.6f} {hist.bin_edges[i + 1]:.6f} "
            f"{int(hist.rare_counts[i])} {int(hist.majority_counts[i])}"
        )
    return "\n".join(lines) + "\n"
