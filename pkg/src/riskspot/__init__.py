"""Probabilistic collision-risk maps for recorded multi-vehicle trajectories.

Pipeline: ingest trajectory CSVs, predict every participant along its
recorded path, turn pairwise Gaussian footprint overlaps into event rates,
integrate them through a survival function into a scalar risk per ego and
timestep, and aggregate everything into criticality maps. Time Headway and
Time-To-Collision are included as reference metrics.
"""

__version__ = "0.1.0"

from .analysis import (
    BIN_LABELS,
    METRICS,
    BinCountError,
    BinningError,
    CriticalityBin,
    CriticalityBinning,
    CriticalityMap,
    RiskEvent,
    bin_fixed,
    bin_matched,
    build_map,
    evaluate_dataset,
    front_pairs_over_dataset,
    velocity_histograms,
)
from .baselines import BaselineResult, time_headway, time_to_collision
from .collision import (
    CollisionConfig,
    DegenerateCovarianceError,
    GaussianFootprint,
    UncertaintyGrowth,
    build_pmm,
    collision_probability,
    collision_profile,
    gaussian_1d_overlap,
    gaussian_2d_overlap,
    plain_footprint,
    rotate_covariance,
    sigma_growth,
)
from .config import ConfigError, RunConfig
from .core import (
    InvalidPathError,
    KinematicState,
    Path,
    SceneSnapshot,
    normalize_angle,
    pose_at_arclength,
    poses_at_arclengths,
    project_to_path,
)
from .ingest import (
    ColumnSchema,
    DataError,
    EmptyDatasetError,
    HistogramStats,
    SchemaError,
    Track,
    TrajectoryDataset,
    differentiate,
    ema_smooth_bidirectional,
    kinematics_statistics,
    parse_trajectories,
    smooth_dataset,
)
from .predict import (
    BEHAVIOR_CONSTANT_VELOCITY,
    BEHAVIOR_SUDDEN_STOP,
    FrontVehicle,
    PredictedTrajectory,
    front_vehicle,
    neighbors_in_range,
    predict,
)
from .survival import (
    GridAlignmentError,
    RateProfile,
    RiskProfile,
    collision_rate,
    integrated_risk,
    scene_risk,
    survival_function,
)
