"""Synthetic manifold samples and delimited-text ingestion.

Generators cover the benchmark geometries used throughout the test suite:
a trigonometric moment curve in R^6 (intrinsically 1-dimensional), an
axis-stretched Gaussian mixture majority class, and classic low-dimensional
manifolds (flat torus, real projective plane, 3-sphere) embedded in R^10.
Ingestion handles whitespace- or character-delimited numeric files with a
label column, matching the published layouts of the four UCI benchmark
datasets; the files themselves are user-supplied (see README for sources).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RowParseError, SchemaError
from .geometry import PointCloud

TRIG_CURVE_6D = "trig_curve_6d"
TORUS_10D = "torus_10d"
RP2_10D = "rp2_10d"
S3_10D = "s3_10d"
GAUSSIAN_10D = "gaussian"

MANIFOLD_KINDS = (TRIG_CURVE_6D, TORUS_10D, RP2_10D, S3_10D, GAUSSIAN_10D)

_MASK64 = (1 << 64) - 1

# Fixed seed for the shared rotation that spreads the low-dimensional
# embeddings across all 10 ambient coordinates.
_ROTATION_SEED = 0x10D50
_rotation_cache: np.ndarray | None = None


def trig_moment_curve_points(t: np.ndarray) -> np.ndarray:
    """Map parameters t to (cos t, sin t, cos 2t, sin 2t, cos 3t, sin 3t)."""
    t = np.asarray(t, dtype=np.float64)
    cols = []
    for j in (1, 2, 3):
        cols.append(np.cos(j * t))
        cols.append(np.sin(j * t))
    return np.stack(cols, axis=-1)


def gen_trig_moment_curve(count: int, seed: int) -> PointCloud:
    """Sample the trigonometric moment curve in R^6 at uniform parameters."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed & _MASK64)
    t = rng.uniform(0.0, 2.0 * math.pi, count)
    return PointCloud(trig_moment_curve_points(t))


def gen_gaussian_majority(count_per_cluster: int, seed: int) -> PointCloud:
    """Six Gaussian clusters in R^6, centered at the origin.

    Cluster i (1-based) has diagonal covariance 0.2 everywhere except 1.0 at
    coordinate i, so each cluster is stretched along one axis.  Labels are
    'cluster1' .. 'cluster6'.
    """
    if count_per_cluster < 1:
        raise ValueError("count_per_cluster must be >= 1")
    rng = np.random.default_rng(seed & _MASK64)
    blocks = []
    labels = []
    for i in range(6):
        stddev = np.full(6, math.sqrt(0.2))
        stddev[i] = 1.0
        blocks.append(rng.standard_normal((count_per_cluster, 6)) * stddev)
        labels.extend([f"cluster{i + 1}"] * count_per_cluster)
    return PointCloud(np.vstack(blocks), tuple(labels))


def embedding_rotation() -> np.ndarray:
    """The fixed orthogonal map of R^10 applied to all manifold embeddings."""
    global _rotation_cache
    if _rotation_cache is None:
        rng = np.random.default_rng(_ROTATION_SEED)
        q, r = np.linalg.qr(rng.standard_normal((10, 10)))
        q = q * np.where(np.diagonal(r) < 0, -1.0, 1.0)
        q.setflags(write=False)
        _rotation_cache = q
    return _rotation_cache


def gen_manifold_samples(kind: str, count: int, seed: int) -> PointCloud:
    """Sample a named manifold smoothly embedded in R^10.

    torus_10d: product of two unit circles (cos u, sin u, cos v, sin v);
    s3_10d: the unit sphere in R^4; rp2_10d: the real projective plane via
    the degree-2 Veronese map (x^2, y^2, z^2, xy, xz, yz) of a unit vector,
    which identifies antipodes.  Each embedding is zero-padded to R^10 and
    composed with the fixed rotation from `embedding_rotation` so that no
    ambient coordinate is trivially zero.  Kind 'gaussian' is a standard
    normal sample of R^10 for comparison.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if kind not in MANIFOLD_KINDS:
        raise ValueError(f"unknown manifold kind {kind!r}")
    if kind == TRIG_CURVE_6D:
        return gen_trig_moment_curve(count, seed)

    rng = np.random.default_rng(seed & _MASK64)
    if kind == GAUSSIAN_10D:
        return PointCloud(rng.standard_normal((count, 10)))

    out = np.zeros((count, 10))
    if kind == TORUS_10D:
        u = rng.uniform(0.0, 2.0 * math.pi, count)
        v = rng.uniform(0.0, 2.0 * math.pi, count)
        out[:, 0] = np.cos(u)
        out[:, 1] = np.sin(u)
        out[:, 2] = np.cos(v)
        out[:, 3] = np.sin(v)
    elif kind == S3_10D:
        g = rng.standard_normal((count, 4))
        out[:, :4] = g / np.linalg.norm(g, axis=1, keepdims=True)
    else:  # RP2_10D
        g = rng.standard_normal((count, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        x, y, z = g[:, 0], g[:, 1], g[:, 2]
        out[:, 0] = x * x
        out[:, 1] = y * y
        out[:, 2] = z * z
        out[:, 3] = x * y
        out[:, 4] = x * z
        out[:, 5] = y * z
    return PointCloud(out @ embedding_rotation().T)


@dataclass(frozen=True)
class IngestSchema:
    """Layout of a delimited numeric file with one label column.

    `delimiter=None` splits rows on whitespace runs.  `label_column` may be
    negative to count from the end.  `drop_columns` are removed before the
    features are parsed (identifier fields and the like).
    """

    delimiter: str | None = None
    label_column: int = -1
    drop_columns: tuple[int, ...] = ()
    has_header: bool = False

    def __post_init__(self):
        drops = tuple(sorted(set(int(c) for c in self.drop_columns)))
        object.__setattr__(self, "drop_columns", drops)
        if self.label_column >= 0 and self.label_column in drops:
            raise ValueError("label_column cannot be dropped")


UCI_PRESETS: dict[str, IngestSchema] = {
    # ecoli.data: sequence name, 7 features, class tag, whitespace-separated
    "ecoli": IngestSchema(delimiter=None, label_column=-1, drop_columns=(0,)),
    # page-blocks.data: 10 features, integer class, whitespace-separated
    "pageblocks": IngestSchema(delimiter=None, label_column=-1),
    # shuttle.trn / shuttle.tst: 9 features, integer class
    "shuttle": IngestSchema(delimiter=None, label_column=-1),
    # glass.data: id, 9 features, integer class, comma-separated
    "glass": IngestSchema(delimiter=",", label_column=-1, drop_columns=(0,)),
}

# Rare classes used in the benchmark experiments: E. coli outer membrane
# proteins, page-block horizontal lines, shuttle 'Fpv Close' (50 points),
# glass float-processed vehicle windows.
PRESET_RARE_LABELS = {
    "ecoli": "om",
    "pageblocks": "2",
    "shuttle": "2",
    "glass": "3",
}


def load_delimited(path, schema: IngestSchema) -> PointCloud:
    """Load a labeled point cloud from a delimited text file.

    Every data row must parse to the same feature count; blank lines are
    skipped and row order is preserved.
    """
    features: list[list[float]] = []
    labels: list[str] = []
    arity: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        saw_header = False
        for line_number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if schema.has_header and not saw_header:
                saw_header = True
                continue
            parts = line.split(schema.delimiter)
            if arity is None:
                arity = len(parts)
                label_idx = schema.label_column % arity
                if label_idx in schema.drop_columns:
                    raise SchemaError(f"{path}: label column {label_idx} is dropped")
                skip = set(schema.drop_columns) | {label_idx}
                if max(schema.drop_columns, default=-1) >= arity:
                    raise SchemaError(
                        f"{path}: drop column out of range for {arity} fields"
                    )
            elif len(parts) != arity:
                raise SchemaError(
                    f"{path}:{line_number}: expected {arity} fields, got {len(parts)}"
                )
            try:
                features.append(
                    [float(parts[i]) for i in range(arity) if i not in skip]
                )
            except ValueError as exc:
                raise RowParseError(path, line_number, str(exc)) from None
            labels.append(parts[label_idx])
    if arity is None:
        raise SchemaError(f"{path}: file contains no data rows")
    return PointCloud(np.asarray(features), tuple(labels))


def save_cloud(cloud: PointCloud, path) -> None:
    """Write a cloud as text: 'count n has_labels' header then one row per
    point, features at full precision, label appended when present."""
    with open(path, "w", encoding="utf-8") as fh:
        has_labels = 1 if cloud.labels is not None else 0
        fh.write(f"{cloud.count} {cloud.ambient_dim} {has_labels}\n")
        for i in range(cloud.count):
            row = " ".join(repr(float(v)) for v in cloud.points[i])
            if has_labels:
                row += f" {cloud.labels[i]}"
            fh.write(row + "\n")


def load_cloud(path) -> PointCloud:
    """Read a cloud written by `save_cloud`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise SchemaError(f"{path}: malformed header")
        try:
            count, dim, has_labels = (int(x) for x in header)
        except ValueError:
            raise SchemaError(f"{path}: malformed header") from None
        points = np.empty((count, dim))
        labels: list[str] | None = [] if has_labels else None
        for i in range(count):
            parts = fh.readline().split()
            expected = dim + (1 if has_labels else 0)
            if len(parts) != expected:
                raise RowParseError(path, i + 2, f"expected {expected} fields")
            try:
                points[i] = [float(v) for v in parts[:dim]]
            except ValueError as exc:
                raise RowParseError(path, i + 2, str(exc)) from None
            if has_labels:
                labels.append(parts[dim])
    return PointCloud(points, tuple(labels) if has_labels else None)
