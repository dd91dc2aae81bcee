"""Point clouds and normalized secant sets.

A secant is the difference between two distinct data points scaled to unit
length.  Working with the full set of pairwise secants (rather than the raw
points) puts large- and small-scale structure on equal footing; the shortest
secants are the ones most contaminated by noise, so a filter policy can
discard them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateSecantSetError,
    DimensionError,
    InsufficientPointsError,
)

FILTER_NONE = "none"
FILTER_ABSOLUTE = "absolute_min_length"
FILTER_FRACTION = "drop_shortest_fraction"
_FILTER_MODES = (FILTER_NONE, FILTER_ABSOLUTE, FILTER_FRACTION)


@dataclass(frozen=True)
class SecantFilterPolicy:
    """How to discard short secants: no filtering, a raw-length floor, or
    dropping a fixed fraction of the shortest pairs."""

    mode: str = FILTER_NONE
    value: float = 0.0

    def __post_init__(self):
        if self.mode not in _FILTER_MODES:
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if self.value < 0:
            raise ValueError("filter value must be nonnegative")
        if self.mode == FILTER_FRACTION and not self.value < 1.0:
            raise ValueError("drop_shortest_fraction value must be < 1")

    @classmethod
    def none(cls) -> "SecantFilterPolicy":
        return cls(FILTER_NONE, 0.0)

    @classmethod
    def absolute_min_length(cls, min_length: float) -> "SecantFilterPolicy":
        return cls(FILTER_ABSOLUTE, float(min_length))

    @classmethod
    def drop_shortest_fraction(cls, fraction: float) -> "SecantFilterPolicy":
        return cls(FILTER_FRACTION, float(fraction))


@dataclass
class PointCloud:
    """Points in R^n, optionally carrying a per-point class label."""

    points: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array of shape (count, n)")
        if pts.shape[0] < 1:
            raise InsufficientPointsError("a point cloud needs at least one point")
        self.points = pts
        if self.labels is not None:
            self.labels = tuple(str(lab) for lab in self.labels)
            if len(self.labels) != pts.shape[0]:
                raise ValueError("labels must match the number of points")

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def subset(self, indices: Sequence[int]) -> "PointCloud":
        idx = np.asarray(indices, dtype=int)
        labels = tuple(self.labels[i] for i in idx) if self.labels else None
        return PointCloud(self.points[idx], labels)

    def without(self, index: int) -> "PointCloud":
        keep = [i for i in range(self.count) if i != index]
        return self.subset(keep)

    def with_point(self, point: np.ndarray, label: str | None = None) -> "PointCloud":
        """Return a new cloud with `point` appended as the last row."""
        point = np.asarray(point, dtype=np.float64).reshape(1, -1)
        if point.shape[1] != self.ambient_dim:
            raise DimensionError(
                f"point has dimension {point.shape[1]}, cloud has {self.ambient_dim}"
            )
        pts = np.vstack([self.points, point])
        labels = None
        if self.labels is not None:
            labels = self.labels + (label if label is not None else "",)
        return PointCloud(pts, labels)


def _canonical_rows(vectors: np.ndarray) -> np.ndarray:
    """Sign-canonicalize rows (first nonzero entry positive) and drop exact
    duplicates.  Output rows are in lexicographic order."""
    w = vectors.copy()
    lead = (w != 0.0).argmax(axis=1)
    lead_vals = w[np.arange(len(w)), lead]
    w[lead_vals < 0] *= -1.0
    w += 0.0  # normalize -0.0 to +0.0
    return np.unique(w, axis=0)


@dataclass
class SecantSet:
    """Unit-length pairwise difference vectors of a point cloud.

    `vectors` holds one row per kept unordered pair; `discarded_count` counts
    zero-length (duplicate-point) pairs plus pairs removed by the filter
    policy, so kept + discarded equals C(source_count, 2).
    """

    vectors: np.ndarray
    source_count: int
    discarded_count: int

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def canonical_directions(self) -> np.ndarray:
        """Deduplicated, sign-canonical secant directions (solver input).

        The max-min objective is invariant to secant sign and multiplicity,
        so solving over this reduced set gives identical values while making
        repeated-direction inputs (e.g. duplicated points) bit-reproducible.
        """
        return _canonical_rows(self.vectors)


def compute_normalized_secants(
    cloud: PointCloud, policy: SecantFilterPolicy = SecantFilterPolicy()
) -> SecantSet:
    """Build the normalized secant set of a cloud.

    One secant per unordered pair, oriented earlier-index minus later-index.
    Pairs with zero raw length are dropped silently (duplicate points are
    legitimate inputs); the policy then discards short pairs, with fraction
    mode removing floor(fraction * nonzero_pair_count) of the shortest by raw
    length, ties broken by pair enumeration order.
    """
    m = cloud.count
    if m < 2:
        raise InsufficientPointsError("need at least 2 points to form secants")
    ii, jj = np.triu_indices(m, k=1)  # lexicographic pair order
    diffs = cloud.points[ii] - cloud.points[jj]
    lengths = np.linalg.norm(diffs, axis=1)

    nonzero = lengths > 0.0
    discarded = int(np.count_nonzero(~nonzero))
    diffs = diffs[nonzero]
    lengths = lengths[nonzero]

    if policy.mode == FILTER_ABSOLUTE:
        keep = lengths >= policy.value
        discarded += int(np.count_nonzero(~keep))
        diffs = diffs[keep]
        lengths = lengths[keep]
    elif policy.mode == FILTER_FRACTION:
        quota = math.floor(policy.value * len(lengths))
        if quota > 0:
            order = np.argsort(lengths, kind="stable")
            keep = np.ones(len(lengths), dtype=bool)
            keep[order[:quota]] = False
            discarded += quota
            diffs = diffs[keep]
            lengths = lengths[keep]

    if len(diffs) == 0:
        raise DegenerateSecantSetError(
            "all point pairs were discarded (duplicates or filtering)"
        )
    secants = diffs / lengths[:, None]
    return SecantSet(secants, source_count=m, discarded_count=discarded)
