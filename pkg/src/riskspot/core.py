"""Shared geometry and scene types: polyline paths, kinematic states, snapshots.

Positions are metres in a local East/North frame, headings are radians in
(-pi, pi], and arc lengths are metres measured along a vehicle's path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np

__all__ = [
    "InvalidPathError",
    "Path",
    "KinematicState",
    "SceneSnapshot",
    "normalize_angle",
    "pose_at_arclength",
    "poses_at_arclengths",
    "project_to_path",
]


class InvalidPathError(ValueError):
    """Polyline with fewer than two points or a zero-length segment."""


def normalize_angle(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    wrapped = math.atan2(math.sin(angle), math.cos(angle))
    if wrapped <= -math.pi:
        return math.pi
    return wrapped


class Path:
    """Piecewise-linear path with cumulative arc-length parametrization.

    Consecutive points must be distinct so every segment has a well-defined
    direction. ``cumulative_arclength`` starts at 0 and is strictly
    increasing; ``points`` and the derived per-segment data are read-only
    after construction, so instances can be shared freely across threads.
    """

    __slots__ = ("points", "cumulative_arclength", "_seg_len", "_seg_dir", "_seg_heading")

    def __init__(self, points) -> None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise InvalidPathError(
                f"path needs at least two 2D points, got array of shape {pts.shape}"
            )
        seg = np.diff(pts, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if not np.all(seg_len > 0.0):
            raise InvalidPathError("consecutive path points must be distinct")
        self.points = pts
        self.cumulative_arclength = np.concatenate(([0.0], np.cumsum(seg_len)))
        self._seg_len = seg_len
        self._seg_dir = seg / seg_len[:, None]
        self._seg_heading = np.arctan2(self._seg_dir[:, 1], self._seg_dir[:, 0])

    @property
    def total_arclength(self) -> float:
        return float(self.cumulative_arclength[-1])

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return f"Path({len(self)} points, {self.total_arclength:.2f} m)"

    @classmethod
    def from_points(cls, points, min_gap: float = 1e-6) -> "Path":
        """Build a path from a recorded position sequence.

        Points closer than ``min_gap`` to the previously kept point are
        dropped (a stopped vehicle produces long runs of near-identical
        positions that would violate the distinct-points invariant).
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidPathError(f"expected an (N, 2) array, got shape {pts.shape}")
        kept = [0]
        for i in range(1, pts.shape[0]):
            if math.hypot(*(pts[i] - pts[kept[-1]])) >= min_gap:
                kept.append(i)
        if len(kept) < 2:
            raise InvalidPathError("fewer than two distinct points")
        return cls(pts[kept])


def poses_at_arclengths(path: Path, arclengths) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized pose lookup: positions (..., 2) and headings (...).

    Arc lengths beyond either end extrapolate along the first/last segment,
    which keeps the pose continuous when predictions run off the recorded
    path.
    """
    ls = np.asarray(arclengths, dtype=float)
    idx = np.searchsorted(path.cumulative_arclength, ls, side="right") - 1
    idx = np.clip(idx, 0, len(path._seg_len) - 1)
    offset = ls - path.cumulative_arclength[idx]
    positions = path.points[idx] + offset[..., None] * path._seg_dir[idx]
    return positions, path._seg_heading[idx]


def pose_at_arclength(path: Path, arclength: float) -> Tuple[np.ndarray, float]:
    """Position and heading at one arc length; heading at a vertex uses the
    outgoing segment."""
    positions, headings = poses_at_arclengths(path, float(arclength))
    return positions, float(headings)


def project_to_path(path: Path, point) -> float:
    """Arc length of the closest point on the polyline.

    Ties are broken toward the smaller arc length; points beyond the ends
    clamp to 0 or the total arc length.
    """
    p = np.asarray(point, dtype=float)
    rel = p[None, :] - path.points[:-1]
    along = np.einsum("ij,ij->i", rel, path._seg_dir)
    t = np.clip(along, 0.0, path._seg_len)
    closest = path.points[:-1] + t[:, None] * path._seg_dir
    d2 = np.einsum("ij,ij->i", closest - p[None, :], closest - p[None, :])
    i = int(np.argmin(d2))
    return float(path.cumulative_arclength[i] + t[i])


@dataclass
class KinematicState:
    """Planar vehicle state with its longitudinal path coordinate.

    ``velocity`` is the forward speed along the path (>= 0 by dataset
    convention), ``arclength`` the position projected onto the vehicle's own
    path.
    """

    position: np.ndarray
    heading: float
    velocity: float
    acceleration: float = 0.0
    arclength: float = 0.0

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        if self.velocity < 0.0:
            raise ValueError(f"longitudinal velocity must be >= 0, got {self.velocity}")
        self.heading = normalize_angle(self.heading)


@dataclass
class SceneSnapshot:
    """All participants observed at one instant, keyed by vehicle id."""

    time: float
    participants: Dict[int, Tuple[KinematicState, Path]] = field(default_factory=dict)

    @classmethod
    def from_participants(
        cls, time: float, entries: Iterable[Tuple[int, KinematicState, Path]]
    ) -> "SceneSnapshot":
        seen: Dict[int, Tuple[KinematicState, Path]] = {}
        for vehicle_id, state, path in entries:
            if vehicle_id in seen:
                raise ValueError(f"duplicate vehicle id {vehicle_id} in scene")
            seen[vehicle_id] = (state, path)
        return cls(time, seen)

    def ids(self):
        return sorted(self.participants)
