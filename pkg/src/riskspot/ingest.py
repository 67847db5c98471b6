"""Trajectory CSV ingest, normalization, zero-phase smoothing, statistics.

Input files follow the NGSIM convention: one row per vehicle per frame at a
fixed frame step, positions in feet by default. Parsing shifts positions to
a local metric frame whose origin is the dataset bounding-box minimum and
derives speeds/accelerations by differentiation of the position series.
Camera-extracted positions carry substantial noise, so velocities and
accelerations are smoothed separately with increasingly wide zero-phase
exponential filters before any risk metric sees them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from .core import InvalidPathError, KinematicState, Path, SceneSnapshot

__all__ = [
    "SchemaError",
    "DataError",
    "EmptyDatasetError",
    "ColumnSchema",
    "Track",
    "TrajectoryDataset",
    "HistogramStats",
    "IngestWarnings",
    "FEET_TO_METERS",
    "parse_trajectories",
    "ema_smooth_bidirectional",
    "differentiate",
    "smooth_dataset",
    "kinematics_statistics",
]

FEET_TO_METERS = 0.3048

# Displacement per step below which a sample is treated as stationary when
# deriving headings.
_HEADING_SPEED_FLOOR = 0.05


class SchemaError(ValueError):
    """Input file does not provide the configured columns."""


class DataError(ValueError):
    """Input rows violate the per-vehicle frame invariants."""


class EmptyDatasetError(ValueError):
    """Statistics requested on a dataset without any usable track."""


@dataclass(frozen=True)
class ColumnSchema:
    """Mapping from logical fields to CSV column names (NGSIM defaults)."""

    vehicle_id: str = "Vehicle_ID"
    frame: str = "Frame_ID"
    x: str = "Local_X"
    y: str = "Local_Y"
    vehicle_class: Optional[str] = "v_Class"


_VEHICLE_CLASSES = {1: "motorbike", 2: "car", 3: "truck_bus"}


@dataclass
class Track:
    """Gap-free time series of one vehicle at the dataset frame step."""

    track_id: int
    vehicle_id: int
    vehicle_class: str
    frames: np.ndarray
    x: np.ndarray
    y: np.ndarray
    v: np.ndarray
    a: np.ndarray
    heading: np.ndarray
    arclength: np.ndarray
    path: Path

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def first_frame(self) -> int:
        return int(self.frames[0])

    @property
    def last_frame(self) -> int:
        return int(self.frames[-1])

    def index_of(self, frame: int) -> int:
        return int(frame) - self.first_frame

    def state_at(self, frame: int) -> KinematicState:
        i = self.index_of(frame)
        return KinematicState(
            position=np.array([self.x[i], self.y[i]]),
            heading=float(self.heading[i]),
            velocity=float(self.v[i]),
            acceleration=float(self.a[i]),
            arclength=float(self.arclength[i]),
        )


@dataclass
class IngestWarnings:
    """Counts of rejected or repaired input rows."""

    short_tracks: int = 0
    split_tracks: int = 0


@dataclass
class TrajectoryDataset:
    """Per-track kinematic series on a common local frame and frame clock."""

    dt_s: float
    tracks: Dict[int, Track]
    warnings: IngestWarnings = field(default_factory=IngestWarnings)

    @property
    def frame_min(self) -> int:
        return min(t.first_frame for t in self.tracks.values())

    @property
    def frame_max(self) -> int:
        return max(t.last_frame for t in self.tracks.values())

    @property
    def total_samples(self) -> int:
        return sum(len(t) for t in self.tracks.values())

    def frames(self) -> range:
        if not self.tracks:
            return range(0)
        return range(self.frame_min, self.frame_max + 1)

    def time_of(self, frame: int) -> float:
        return frame * self.dt_s

    def active_tracks(self, frame: int) -> List[Track]:
        return [
            t
            for _tid, t in sorted(self.tracks.items())
            if t.first_frame <= frame <= t.last_frame
        ]

    def scene_at(self, frame: int) -> SceneSnapshot:
        entries = {}
        for track in self.active_tracks(frame):
            entries[track.track_id] = (track.state_at(frame), track.path)
        return SceneSnapshot(self.time_of(frame), entries)


def parse_trajectories(
    source,
    schema: Optional[ColumnSchema] = None,
    dt_s: float = 0.1,
    feet_to_meters: bool = True,
) -> TrajectoryDataset:
    """Load a trajectory CSV into a local-frame dataset.

    Duplicate (vehicle, frame) rows are rejected. Vehicles whose frame
    sequence has holes are split into contiguous runs (NGSIM recycles ids,
    so a hole usually means a different physical vehicle); runs shorter than
    two frames are dropped. Both repairs are counted in the returned
    warnings.
    """
    if dt_s <= 0.0:
        raise ValueError(f"dt_s must be > 0, got {dt_s}")
    schema = schema or ColumnSchema()
    frame = pd.read_csv(source)
    required = {
        "vehicle_id": schema.vehicle_id,
        "frame": schema.frame,
        "x": schema.x,
        "y": schema.y,
    }
    missing = [name for name in required.values() if name not in frame.columns]
    if missing:
        raise SchemaError(f"missing required column(s): {', '.join(missing)}")

    vids = frame[schema.vehicle_id].to_numpy()
    frames = frame[schema.frame].to_numpy()
    x = frame[schema.x].to_numpy(dtype=float)
    y = frame[schema.y].to_numpy(dtype=float)
    if schema.vehicle_class is not None and schema.vehicle_class in frame.columns:
        classes = frame[schema.vehicle_class].to_numpy()
    else:
        classes = np.full(len(frame), 2)

    if feet_to_meters:
        x = x * FEET_TO_METERS
        y = y * FEET_TO_METERS
    if len(frame) == 0:
        return TrajectoryDataset(dt_s, {})
    x = x - x.min()
    y = y - y.min()

    order = np.lexsort((frames, vids))
    vids, frames, x, y, classes = (arr[order] for arr in (vids, frames, x, y, classes))

    warnings = IngestWarnings()
    tracks: Dict[int, Track] = {}
    next_extra_id = int(vids.max()) + 1
    for vid in np.unique(vids):
        mask = vids == vid
        vframes = frames[mask].astype(int)
        if np.any(np.diff(vframes) == 0):
            raise DataError(f"vehicle {int(vid)} has duplicated frames")
        vx, vy = x[mask], y[mask]
        vclass = _VEHICLE_CLASSES.get(int(classes[mask][0]), "car")
        breaks = np.nonzero(np.diff(vframes) != 1)[0] + 1
        runs = np.split(np.arange(len(vframes)), breaks)
        if len(runs) > 1:
            warnings.split_tracks += len(runs) - 1
        for run_no, run in enumerate(runs):
            if len(run) < 2:
                warnings.short_tracks += 1
                continue
            track_id = int(vid) if run_no == 0 else next_extra_id
            if run_no > 0:
                next_extra_id += 1
            tracks[track_id] = _build_track(
                track_id, int(vid), vclass, vframes[run], vx[run], vy[run], dt_s
            )
    return TrajectoryDataset(dt_s, tracks, warnings)


def _track_path(x: np.ndarray, y: np.ndarray, heading0: float) -> Path:
    points = np.column_stack((x, y))
    try:
        return Path.from_points(points)
    except InvalidPathError:
        # Vehicle never moves: stub a 1 m segment along its heading so the
        # path still has a direction.
        p0 = points[0]
        p1 = p0 + np.array([math.cos(heading0), math.sin(heading0)])
        return Path(np.vstack((p0, p1)))


def _headings_from_motion(dx: np.ndarray, dy: np.ndarray, speed: np.ndarray) -> np.ndarray:
    heading = np.where(speed > _HEADING_SPEED_FLOOR, np.arctan2(dy, dx), np.nan)
    if np.all(np.isnan(heading)):
        return np.zeros_like(heading)
    # Carry the nearest moving sample's heading into stationary stretches.
    idx = np.arange(len(heading))
    valid = ~np.isnan(heading)
    prev = np.maximum.accumulate(np.where(valid, idx, -1))
    nxt = np.minimum.accumulate(np.where(valid, idx, len(heading))[::-1])[::-1]
    fill = np.where(prev >= 0, prev, nxt)
    return heading[np.where(valid, idx, fill)]


def _build_track(
    track_id: int,
    vehicle_id: int,
    vehicle_class: str,
    frames: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    dt_s: float,
    v: Optional[np.ndarray] = None,
    a: Optional[np.ndarray] = None,
) -> Track:
    dx = np.gradient(x, dt_s)
    dy = np.gradient(y, dt_s)
    speed = np.hypot(dx, dy)
    if v is None:
        v = speed
    if a is None:
        a = np.gradient(v, dt_s)
    heading = _headings_from_motion(dx, dy, speed)
    steps = np.hypot(np.diff(x), np.diff(y))
    arclength = np.concatenate(([0.0], np.cumsum(steps)))
    path = _track_path(x, y, float(heading[0]))
    return Track(
        track_id,
        vehicle_id,
        vehicle_class,
        np.asarray(frames, dtype=int),
        x,
        y,
        np.asarray(v, dtype=float),
        np.asarray(a, dtype=float),
        heading,
        arclength,
        path,
    )


def _ema_forward(series: np.ndarray, lam: float) -> np.ndarray:
    if lam >= 1.0:
        return series.copy()
    out, _state = lfilter([lam], [1.0, -(1.0 - lam)], series, zi=np.array([(1.0 - lam) * series[0]]))
    return out


def ema_smooth_bidirectional(series, smoothing_width_s: float, dt_s: float) -> np.ndarray:
    """Exponential moving average applied forwards, then backwards.

    The smoothing factor is dt/T clamped to (0, 1]; the independent backward
    pass on the forward result cancels the phase lag of a single pass.
    """
    if smoothing_width_s <= 0.0:
        raise ValueError(f"smoothing width must be > 0, got {smoothing_width_s}")
    if dt_s <= 0.0:
        raise ValueError(f"dt_s must be > 0, got {dt_s}")
    x = np.asarray(series, dtype=float)
    if x.shape[0] == 0:
        return x.copy()
    lam = min(dt_s / smoothing_width_s, 1.0)
    forward = _ema_forward(x, lam)
    return _ema_forward(forward[::-1], lam)[::-1]


def differentiate(series, dt_s: float) -> np.ndarray:
    """Central differences in the interior, one-sided at the boundaries."""
    x = np.asarray(series, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("differentiation needs at least two samples")
    if dt_s <= 0.0:
        raise ValueError(f"dt_s must be > 0, got {dt_s}")
    return np.gradient(x, dt_s)


def smooth_dataset(
    dataset: TrajectoryDataset,
    t_pos_s: float = 10.0,
    t_vel_s: float = 20.0,
    t_acc_s: float = 80.0,
) -> TrajectoryDataset:
    """Smooth positions, then derive and smooth speeds and accelerations.

    Differentiation amplifies noise, so each derivative level gets its own,
    wider smoothing window. Headings, arc lengths and paths are recomputed
    from the smoothed positions.
    """
    dt = dataset.dt_s
    tracks: Dict[int, Track] = {}
    for tid, track in dataset.tracks.items():
        xs = ema_smooth_bidirectional(track.x, t_pos_s, dt)
        ys = ema_smooth_bidirectional(track.y, t_pos_s, dt)
        speed = np.hypot(differentiate(xs, dt), differentiate(ys, dt))
        v = ema_smooth_bidirectional(speed, t_vel_s, dt)
        a = ema_smooth_bidirectional(differentiate(v, dt), t_acc_s, dt)
        tracks[tid] = _build_track(
            track.track_id,
            track.vehicle_id,
            track.vehicle_class,
            track.frames,
            xs,
            ys,
            dt,
            v=v,
            a=a,
        )
    return TrajectoryDataset(dt, tracks, replace(dataset.warnings))


@dataclass
class HistogramStats:
    """Probability mass and cumulative distribution over fixed-width bins."""

    variable: str
    bin_edges: np.ndarray
    pmf: np.ndarray
    cdf: np.ndarray
    sample_count: int

    @classmethod
    def from_samples(cls, variable: str, values, bin_width: float) -> "HistogramStats":
        if bin_width <= 0.0:
            raise ValueError(f"bin_width must be > 0, got {bin_width}")
        vals = np.asarray(values, dtype=float)
        if vals.size == 0:
            return cls(variable, np.zeros(0), np.zeros(0), np.zeros(0), 0)
        first = math.floor(vals.min() / bin_width)
        last = math.floor(vals.max() / bin_width)
        edges = (first + np.arange(last - first + 2)) * bin_width
        counts, _ = np.histogram(vals, bins=edges)
        pmf = counts / vals.size
        return cls(variable, edges, pmf, np.cumsum(pmf), int(vals.size))


def kinematics_statistics(
    dataset: TrajectoryDataset,
    front_pairs,
    v_bin_width: float = 1.0,
    a_bin_width: float = 0.1,
    gap_bin_width: float = 1.0,
    dv_bin_width: float = 0.5,
) -> List[HistogramStats]:
    """Histograms of v, a, front gap (-dl) and closing speed (dv).

    ``front_pairs`` holds one (dl, dv) pair per timestep with a front
    vehicle, as produced by the partner-selection machinery.
    """
    if not dataset.tracks:
        raise EmptyDatasetError("dataset has no usable tracks")
    v = np.concatenate([t.v for t in dataset.tracks.values()])
    a = np.concatenate([t.a for t in dataset.tracks.values()])
    pairs = np.asarray(front_pairs, dtype=float).reshape(-1, 2)
    gaps = -pairs[:, 0] if pairs.size else np.zeros(0)
    dvs = pairs[:, 1] if pairs.size else np.zeros(0)
    return [
        HistogramStats.from_samples("v", v, v_bin_width),
        HistogramStats.from_samples("a", a, a_bin_width),
        HistogramStats.from_samples("gap", gaps, gap_bin_width),
        HistogramStats.from_samples("dv", dvs, dv_bin_width),
    ]
