"""Classify unlabeled points by how much they perturb the rare-class profile.

A candidate point that genuinely belongs to the rare class should conform to
its geometry: appending it to the labeled rare sample barely moves the kappa
profile.  The detection statistic d_y is the Euclidean distance between the
baseline profile of the rare sample and the profile of the sample with the
candidate included; points with d_y below a threshold are classified rare.
The threshold can be supplied directly or estimated from leave-one-out
perturbations of the labeled sample itself.

Comparing two independently solved profiles would bury the perturbation
under solver noise, so the detector pairs the computations: the rare sample
is profiled once at full depth, and both sides of every comparison are then
re-solved from those same frames under a small shared refinement budget
(`refine_iters`), with shared RNG streams and the rare sample's
initialization frame throughout.  d_y thereby measures how far the rare
class's frames must move to accommodate the candidate; a candidate that
duplicates a rare point changes nothing and gets d_y of exactly zero.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, InsufficientPointsError
from .geometry import PointCloud, SecantFilterPolicy
from .profiles import (
    DimensionRange,
    KappaProfile,
    initialization_frame,
    profile_distance,
    profile_with_frames,
    refine_kappa_profile,
)
from .solver import SolverConfig

RARE = "rare"
MAJORITY = "majority"


@dataclass(frozen=True)
class DetectionConfig:
    """Threshold, dimension range and profile parameters for detection.

    `refine_iters` is the iteration budget for re-solving profiles from the
    baseline frames when candidates are scored; it trades sensitivity to
    off-geometry points (small budgets) against tolerance of conforming
    ones (large budgets).
    """

    threshold: float
    dims: DimensionRange
    trials: int = 5
    policy: SecantFilterPolicy = SecantFilterPolicy.drop_shortest_fraction(0.05)
    solver: SolverConfig = SolverConfig()
    refine_iters: int = 100

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("threshold must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.refine_iters < 1:
            raise ValueError("refine_iters must be positive")


@dataclass
class DetectionOutcome:
    """Per-point result: index into the unlabeled set, perturbation d_y,
    and the assigned class."""

    point_index: int
    d_y: float
    predicted: str
    profile: KappaProfile


@dataclass
class ThresholdReport:
    """Leave-one-out threshold estimate: thresh = r * mean(d_x)."""

    per_point_distances: tuple[float, ...]
    d_avg: float
    r: float
    threshold: float

    @classmethod
    def from_distances(cls, distances, r: float) -> "ThresholdReport":
        distances = tuple(float(d) for d in distances)
        d_avg = float(np.mean(distances))
        return cls(distances, d_avg, float(r), float(r) * d_avg)


def _refined_profile(args):
    points, anchors, dims, trials, policy, cfg = args
    return refine_kappa_profile(PointCloud(points), anchors, dims, trials, policy, cfg)


def kappa_detect(
    rare: PointCloud,
    unlabeled: PointCloud,
    cfg: DetectionConfig,
    jobs: int = 1,
) -> list[DetectionOutcome]:
    """Classify each unlabeled point as rare or majority.

    The rare sample is profiled once at the full solver budget; its solved
    frames anchor a refined baseline profile and, for each unlabeled point
    y, a refined profile of rare + {y}, all under `refine_iters` and shared
    seeds.  y is classified rare exactly when d_y < threshold (strict).
    Outcomes follow input order and the whole computation is deterministic
    for a fixed solver seed; `jobs` > 1 spreads the per-point refinements
    over processes without changing results.
    """
    if rare.ambient_dim != unlabeled.ambient_dim:
        raise DimensionError(
            f"rare points live in R^{rare.ambient_dim}, "
            f"unlabeled in R^{unlabeled.ambient_dim}"
        )
    if rare.count < cfg.dims.max_dim + 1:
        raise InsufficientPointsError(
            f"need at least {cfg.dims.max_dim + 1} labeled rare points "
            f"for dimensions up to {cfg.dims.max_dim}"
        )
    basis = initialization_frame(rare.points)
    _, anchors = profile_with_frames(
        rare, cfg.dims, cfg.trials, cfg.policy, cfg.solver, init_basis=basis
    )
    refine_cfg = replace(cfg.solver, max_iters=cfg.refine_iters)
    baseline = refine_kappa_profile(
        rare, anchors, cfg.dims, cfg.trials, cfg.policy, refine_cfg
    )

    tasks = [
        (
            np.vstack([rare.points, unlabeled.points[idx][None, :]]),
            anchors,
            cfg.dims,
            cfg.trials,
            cfg.policy,
            refine_cfg,
        )
        for idx in range(unlabeled.count)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            profiles = list(pool.map(_refined_profile, tasks, chunksize=4))
    else:
        profiles = [_refined_profile(t) for t in tasks]

    outcomes = []
    for idx, prof in enumerate(profiles):
        d_y = profile_distance(baseline, prof)
        predicted = RARE if d_y < cfg.threshold else MAJORITY
        outcomes.append(DetectionOutcome(idx, d_y, predicted, prof))
    return outcomes


def determine_threshold(
    rare: PointCloud,
    dims: DimensionRange,
    trials: int = 5,
    r: float = 1.3,
    policy: SecantFilterPolicy = SecantFilterPolicy.drop_shortest_fraction(0.05),
    cfg: SolverConfig = SolverConfig(),
    refine_iters: int = 100,
) -> ThresholdReport:
    """Estimate a detection threshold from the labeled rare sample alone.

    For each labeled point x, d_x is the profile perturbation caused by
    removing x; the threshold is r times the mean d_x.  The multiplier r is
    conventionally taken in [1.1, 1.5].  Leave-one-out profiles are refined
    from the full sample's frames exactly the way the detector refines its
    candidate profiles, so the resulting threshold lives on the same scale
    as the detection statistic.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if rare.count < dims.max_dim + 2:
        raise InsufficientPointsError(
            f"leave-one-out threshold needs at least {dims.max_dim + 2} points "
            f"for dimensions up to {dims.max_dim}"
        )
    basis = initialization_frame(rare.points)
    _, anchors = profile_with_frames(
        rare, dims, trials, policy, cfg, init_basis=basis
    )
    refine_cfg = replace(cfg, max_iters=refine_iters)
    baseline = refine_kappa_profile(rare, anchors, dims, trials, policy, refine_cfg)
    distances = []
    for idx in range(rare.count):
        prof = refine_kappa_profile(
            rare.without(idx), anchors, dims, trials, policy, refine_cfg
        )
        distances.append(profile_distance(baseline, prof))
    return ThresholdReport.from_distances(distances, r)


def format_outcomes(
    outcomes: list[DetectionOutcome], true_labels: tuple[str, ...] | None = None
) -> str:
    """Delimited text: point_index, d_y, predicted, true label when known."""
    header = "point_index d_y predicted"
    if true_labels is not None:
        header += " true_label"
    lines = [header]
    for out in outcomes:
        row = f"{out.point_index} {out.d_y:.6f} {out.predicted}"
        if true_labels is not None:
            row += f" {true_labels[out.point_index]}"
        lines.append(row)
    return "\n".join(lines) + "\n"
