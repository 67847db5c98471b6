"""Forward prediction along recorded paths and interaction partner selection.

Longitudinal behaviour over the horizon is deliberately simple: either the
vehicle keeps its current speed or it freezes in place. Lateral behaviour is
fully constrained by the (recorded) path, so risk can only come from wrongly
applied speeds along it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .collision import UncertaintyGrowth, sigma_growth
from .core import KinematicState, Path, SceneSnapshot, pose_at_arclength, poses_at_arclengths, project_to_path

__all__ = [
    "BEHAVIOR_CONSTANT_VELOCITY",
    "BEHAVIOR_SUDDEN_STOP",
    "PredictedTrajectory",
    "FrontVehicle",
    "predict",
    "neighbors_in_range",
    "front_vehicle",
]

BEHAVIOR_CONSTANT_VELOCITY = "constant_velocity"
BEHAVIOR_SUDDEN_STOP = "sudden_stop"
_BEHAVIORS = (BEHAVIOR_CONSTANT_VELOCITY, BEHAVIOR_SUDDEN_STOP)


@dataclass
class PredictedTrajectory:
    """Predicted poses and longitudinal uncertainty over s = 0 .. s_max.

    The path is retained so footprints can later be bent along it.
    """

    vehicle_id: int
    s_grid: np.ndarray
    arclength: np.ndarray
    positions: np.ndarray
    headings: np.ndarray
    velocity: np.ndarray
    sigma_lon: np.ndarray
    path: Path


def predict(
    state: KinematicState,
    path: Path,
    behavior: str = BEHAVIOR_CONSTANT_VELOCITY,
    growth: Optional[UncertaintyGrowth] = None,
    s_max_s: float = 12.0,
    ds_s: float = 0.1,
    vehicle_id: int = -1,
) -> PredictedTrajectory:
    """Roll a vehicle state forward along its path.

    ``constant_velocity`` shifts the arc length by v * ds per step with the
    current speed held fixed; ``sudden_stop`` freezes the vehicle at its
    current arc length with zero modelled speed, so its uncertainty stays at
    the measurement level under velocity-dependent growth.
    """
    if behavior not in _BEHAVIORS:
        raise ValueError(f"unknown behavior {behavior!r}, expected one of {_BEHAVIORS}")
    if ds_s <= 0.0:
        raise ValueError(f"ds_s must be > 0, got {ds_s}")
    if s_max_s < ds_s:
        raise ValueError(f"s_max_s must be >= ds_s, got {s_max_s}")
    if state.velocity < 0.0:
        raise ValueError("velocity must be >= 0")
    if growth is None:
        growth = UncertaintyGrowth()
    n = int(round(s_max_s / ds_s)) + 1
    s = np.arange(n) * ds_s
    if behavior == BEHAVIOR_CONSTANT_VELOCITY:
        v = np.full(n, float(state.velocity))
        ls = state.arclength + state.velocity * s
    else:
        v = np.zeros(n)
        ls = np.full(n, float(state.arclength))
    positions, headings = poses_at_arclengths(path, ls)
    sigma = sigma_growth(growth, v, ds_s)
    return PredictedTrajectory(vehicle_id, s, ls, positions, headings, v, sigma, path)


def neighbors_in_range(scene: SceneSnapshot, ego_id: int, sensor_range_m: float = 50.0) -> List[int]:
    """Other participants within Euclidean sensor range of the ego.

    Ordered by ascending distance, ties by vehicle id.
    """
    if ego_id not in scene.participants:
        raise KeyError(f"ego vehicle {ego_id} not present in scene")
    if sensor_range_m <= 0.0:
        raise ValueError(f"sensor_range_m must be > 0, got {sensor_range_m}")
    ego_pos = scene.participants[ego_id][0].position
    ranked = []
    for vid, (state, _path) in scene.participants.items():
        if vid == ego_id:
            continue
        d = math.hypot(state.position[0] - ego_pos[0], state.position[1] - ego_pos[1])
        if d <= sensor_range_m:
            ranked.append((d, vid))
    return [vid for _d, vid in sorted(ranked)]


@dataclass(frozen=True)
class FrontVehicle:
    """Nearest vehicle ahead on the ego's path.

    ``dl_m`` = ego arc length minus the partner's projected arc length
    (negative when the partner is ahead); ``dv_mps`` = ego speed minus
    partner speed.
    """

    vehicle_id: int
    dl_m: float
    dv_mps: float


def _project_extended(path: Path, point) -> tuple:
    """Arc length and lateral offset of a point against a path whose final
    segment is treated as extending indefinitely.

    Matches the pose extrapolation convention, so a vehicle just beyond the
    end of a recorded path still projects onto the lane instead of piling up
    at the endpoint.
    """
    p = np.asarray(point, dtype=float)
    l = project_to_path(path, p)
    if l >= path.total_arclength - 1e-12:
        end = path.points[-1]
        direction = path._seg_dir[-1]
        along = float((p - end) @ direction)
        if along > 0.0:
            foot = end + along * direction
            return path.total_arclength + along, float(np.hypot(*(p - foot)))
    on_path, _heading = pose_at_arclength(path, l)
    return l, float(np.hypot(*(p - on_path)))


def front_vehicle(
    scene: SceneSnapshot,
    ego_id: int,
    sensor_range_m: float = 50.0,
    lane_offset_m: float = 1.8,
) -> Optional[FrontVehicle]:
    """Nearest participant ahead of the ego on the ego's path.

    A candidate counts as "ahead on the same path" when its projected arc
    length exceeds the ego's and its lateral offset from the path stays
    below roughly half a lane width. Absence is a valid empty result.
    """
    if ego_id not in scene.participants:
        raise KeyError(f"ego vehicle {ego_id} not present in scene")
    ego_state, ego_path = scene.participants[ego_id]
    best: Optional[tuple] = None
    for vid in sorted(scene.participants):
        if vid == ego_id:
            continue
        state, _path = scene.participants[vid]
        dist = math.hypot(
            state.position[0] - ego_state.position[0],
            state.position[1] - ego_state.position[1],
        )
        if dist > sensor_range_m:
            continue
        l_other, lateral = _project_extended(ego_path, state.position)
        if l_other <= ego_state.arclength:
            continue
        if lateral >= lane_offset_m:
            continue
        gap = l_other - ego_state.arclength
        if best is None or (gap, vid) < best[:2]:
            best = (gap, vid, l_other, state.velocity)
    if best is None:
        return None
    _gap, vid, l_other, v_other = best
    return FrontVehicle(vid, ego_state.arclength - l_other, ego_state.velocity - v_other)
