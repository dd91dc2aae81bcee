"""Rare-category detection from secant-projection dimension statistics."""

from .datasets import (
    IngestSchema,
    MANIFOLD_KINDS,
    PRESET_RARE_LABELS,
    UCI_PRESETS,
    gen_gaussian_majority,
    gen_manifold_samples,
    gen_trig_moment_curve,
    load_cloud,
    load_delimited,
    save_cloud,
)
from .detector import (
    MAJORITY,
    RARE,
    DetectionConfig,
    DetectionOutcome,
    ThresholdReport,
    determine_threshold,
    kappa_detect,
)
from .errors import (
    ConfigError,
    DegenerateSecantSetError,
    DimensionError,
    IngestError,
    InsufficientPointsError,
    KappaDetectError,
    ProfileMismatchError,
    RankError,
    RowParseError,
    SchemaError,
)
from .geometry import (
    PointCloud,
    SecantFilterPolicy,
    SecantSet,
    compute_normalized_secants,
)
from .harness import (
    ExperimentSpec,
    Histogram,
    MetricsReport,
    export_histogram,
    run_experiment,
    singular_value_profile,
)
from .profiles import (
    DimensionRange,
    KappaProfile,
    compute_kappa_profile,
    initialization_frame,
    profile_distance,
    profile_with_frames,
    refine_kappa_profile,
)
from .solver import (
    Projection,
    SolverConfig,
    derive_seed,
    kappa_of,
    orthonormalize,
    random_projection,
    solve_min_secant_projection,
)

__version__ = "0.1.0"
