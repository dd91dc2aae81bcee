"""Kappa profiles: max-min secant preservation across a range of dimensions.

The profile of a cloud is the tuple of kappa values for increasing target
dimensions.  It sits higher for data of lower intrinsic dimension, which is
what the detector exploits.  Because each kappa comes from a non-convex
solve, profiles are averaged over several independently initialized trials.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, InsufficientPointsError, ProfileMismatchError
from .geometry import PointCloud, SecantFilterPolicy, compute_normalized_secants
from .solver import (
    Projection,
    SolverConfig,
    best_sampled_frame,
    derive_seed,
    orthonormalize,
    solve_min_secant_projection,
)


@dataclass(frozen=True)
class DimensionRange:
    """A strictly increasing sequence of target dimensions."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("dimension range must be nonempty")
        if dims[0] < 1:
            raise ValueError("dimensions must be >= 1")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError("dimensions must be strictly increasing")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def up_to(cls, n: int) -> "DimensionRange":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def span(cls, lo: int, hi: int) -> "DimensionRange":
        return cls(tuple(range(lo, hi + 1)))

    @property
    def max_dim(self) -> int:
        return self.dims[-1]

    def __len__(self) -> int:
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)


@dataclass
class KappaProfile:
    """Kappa values over a dimension range, averaged across trials."""

    dims: DimensionRange
    values: np.ndarray
    trials_averaged: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (len(self.dims),):
            raise ValueError("values length must match dimension range")
        if np.any(vals < 0.0) or np.any(vals > 1.0 + 1e-9):
            raise ValueError("profile values must lie in [0, 1]")
        if self.trials_averaged < 1:
            raise ValueError("trials_averaged must be positive")
        self.values = vals


def initialization_frame(points: np.ndarray) -> np.ndarray:
    """Orthogonal frame aligned with the data, used to seat random solver
    initializations.

    Columns are covariance eigenvectors of the distinct points (descending
    eigenvalue), each signed so the projected third moment is nonnegative.
    The frame is equivariant under rigid motions and scaling of the cloud,
    which makes seeded profiles invariant to the pose of the data, and it
    depends only on the set of distinct points, so duplicated points leave
    it bit-for-bit unchanged.
    """
    distinct = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    centered = distinct - distinct.mean(axis=0)
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    vecs = vecs[:, ::-1]
    proj = centered @ vecs
    skew = np.sum(proj**3, axis=0)
    vecs = vecs * np.where(skew < 0, -1.0, 1.0)
    return np.ascontiguousarray(vecs)


def _augment_frame(prev: Projection, k: int, frame: np.ndarray, rng) -> Projection:
    """Extend a frame from prev.k to k columns with random directions drawn
    in data-frame coordinates."""
    extra = frame @ rng.standard_normal((frame.shape[0], k - prev.k))
    return orthonormalize(np.hstack([prev.matrix, extra]))


def _validate_profile_inputs(cloud, dims, trials):
    if cloud.count < 2:
        raise InsufficientPointsError("profiles need at least 2 points")
    if dims.max_dim > cloud.ambient_dim:
        raise DimensionError(
            f"dimension range reaches {dims.max_dim}, ambient is {cloud.ambient_dim}"
        )
    if trials < 1:
        raise ValueError("trials must be positive")


def profile_with_frames(
    cloud: PointCloud,
    dims: DimensionRange,
    trials: int = 5,
    policy: SecantFilterPolicy = SecantFilterPolicy(),
    cfg: SolverConfig = SolverConfig(),
    warm_start: bool = True,
    init_basis: np.ndarray | None = None,
) -> tuple[KappaProfile, list[list[Projection]]]:
    """Like `compute_kappa_profile` but also returns the solved frames,
    indexed as frames[trial][dim_index], for use as refinement anchors."""
    _validate_profile_inputs(cloud, dims, trials)
    secants = compute_normalized_secants(cloud, policy)
    frame = init_basis if init_basis is not None else initialization_frame(cloud.points)
    n = cloud.ambient_dim

    totals = np.zeros(len(dims))
    frames: list[list[Projection]] = []
    for j in range(trials):
        row: list[Projection] = []
        prev: Projection | None = None
        for i, k in enumerate(dims):
            seed_jk = derive_seed(cfg.seed, j, k)
            rng = np.random.default_rng(seed_jk & (2**64 - 1))
            if warm_start and prev is not None:
                init = _augment_frame(prev, k, frame, rng)
            else:
                q, r = np.linalg.qr(rng.standard_normal((n, k)))
                init = Projection(frame @ (q * np.where(np.diagonal(r) < 0, -1.0, 1.0)))
            proj, kappa = solve_min_secant_projection(
                secants, k, replace(cfg, seed=seed_jk), init=init
            )
            totals[i] += kappa
            row.append(proj)
            prev = proj
        frames.append(row)
    return KappaProfile(dims, totals / trials, trials), frames


def compute_kappa_profile(
    cloud: PointCloud,
    dims: DimensionRange,
    trials: int = 5,
    policy: SecantFilterPolicy = SecantFilterPolicy(),
    cfg: SolverConfig = SolverConfig(),
    warm_start: bool = True,
    init_basis: np.ndarray | None = None,
) -> KappaProfile:
    """Average kappa profile of a cloud over independently seeded trials.

    The solve for trial j at dimension k uses the RNG stream
    derive_seed(cfg.seed, j, k), so the result does not depend on evaluation
    order.  With `warm_start` (default) each trial solves dimensions in
    increasing order and initializes dimension k from the previous solution
    extended by random columns, which makes the profile near-monotone; the
    first dimension of each trial starts from a fresh random frame seated
    in the cloud's own coordinate frame (see `initialization_frame`).

    `init_basis` overrides that frame.  Profile comparisons are far less
    noisy when the two clouds share the seed and the basis, because equally
    seeded trials then follow paired trajectories; the detector relies on
    this when it profiles the rare sample with one candidate point added.
    """
    profile, _ = profile_with_frames(
        cloud, dims, trials, policy, cfg, warm_start, init_basis
    )
    return profile


def refine_kappa_profile(
    cloud: PointCloud,
    anchors: list[list[Projection]],
    dims: DimensionRange,
    trials: int = 5,
    policy: SecantFilterPolicy = SecantFilterPolicy(),
    cfg: SolverConfig = SolverConfig(),
) -> KappaProfile:
    """Profile of a cloud computed by locally refining anchor frames.

    Each (trial, dimension) solve starts from the corresponding anchor and
    refines it on this cloud's secants under cfg's iteration budget.  With
    anchors taken from a reference cloud's solves, the profile measures how
    far the reference frames must move to accommodate the new secant set;
    refining the reference cloud itself through the same procedure gives
    the matching baseline, and identical secant sets then reproduce it
    exactly.
    """
    _validate_profile_inputs(cloud, dims, trials)
    if len(anchors) != trials or any(len(row) != len(dims) for row in anchors):
        raise ValueError("anchor frames must be indexed [trial][dim]")
    secants = compute_normalized_secants(cloud, policy)
    totals = np.zeros(len(dims))
    for j in range(trials):
        for i, k in enumerate(dims):
            seed_jk = derive_seed(cfg.seed, j, k)
            _, kappa = solve_min_secant_projection(
                secants, k, replace(cfg, seed=seed_jk), init=anchors[j][i]
            )
            totals[i] += kappa
    return KappaProfile(dims, totals / trials, trials)


def profile_distance(a: KappaProfile, b: KappaProfile) -> float:
    """Euclidean distance between two profiles over the same dimensions."""
    if a.dims != b.dims:
        raise ProfileMismatchError(
            f"profiles cover different dimensions: {a.dims.dims} vs {b.dims.dims}"
        )
    return float(np.linalg.norm(a.values - b.values))


def format_profile(profile: KappaProfile) -> str:
    """Flat text record: dims, values (6 decimals), trials averaged."""
    lines = [
        "dims " + " ".join(str(d) for d in profile.dims),
        "values " + " ".join(f"{v:.6f}" for v in profile.values),
        f"trials_averaged {profile.trials_averaged}",
    ]
    return "\n".join(lines) + "\n"
