"""Dataset-wide metric evaluation, criticality binning, maps and histograms.

Every vehicle takes the ego role in turn at every timestep it exists. The
resulting events carry one criticality value each (integrated risk for the
probabilistic metric, inverse time for the baselines, so larger always means
more critical) and are sorted into four criticality bins either by fixed
boundaries or by count-matching against a reference binning.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import time_headway, time_to_collision
from .collision import FootprintSequence, footprint_sequence, profile_between
from .config import ConfigError, RunConfig
from .ingest import HistogramStats, TrajectoryDataset
from .predict import front_vehicle, neighbors_in_range, predict
from .survival import RateProfile, collision_rate, integrated_risk

__all__ = [
    "METRICS",
    "BIN_LABELS",
    "BinningError",
    "BinCountError",
    "RiskEvent",
    "CriticalityBin",
    "CriticalityBinning",
    "CriticalityMap",
    "evaluate_dataset",
    "bin_fixed",
    "bin_matched",
    "build_map",
    "velocity_histograms",
    "front_pairs_over_dataset",
    "natural_value",
]

METRICS = ("rsd_front", "rsd_all", "th", "ttc")
BIN_LABELS = ("dangerous", "offensive", "uncomfortable", "noticeable")


class BinningError(ValueError):
    """Binning request inconsistent with the event list."""


class BinCountError(BinningError):
    """Fewer events than the reference counts require."""


@dataclass(frozen=True)
class RiskEvent:
    """One evaluated (ego, timestep) with its criticality value.

    ``metric_value`` ranks criticality ascending-is-safer for every metric:
    the integrated risk itself, or 1/TH and 1/TTC for the baselines.
    """

    ego_id: int
    t_s: float
    east_m: float
    north_m: float
    ego_velocity_mps: float
    metric_value: float


def canonical_metric(metric: str) -> str:
    name = metric.strip().lower()
    if name not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}, expected one of {METRICS}")
    return name


def natural_value(metric: str, ranking_value: float) -> float:
    """Convert a ranking value back to the metric's natural units.

    Baselines rank by inverse time, so their natural value is the time in
    seconds; the probabilistic risk is already in natural units.
    """
    if metric in ("th", "ttc"):
        return 1.0 / ranking_value
    return ranking_value


def _baseline_events_for_frame(
    dataset: TrajectoryDataset, frame: int, metric: str, config: RunConfig
) -> List[RiskEvent]:
    scene = dataset.scene_at(frame)
    t = dataset.time_of(frame)
    events: List[RiskEvent] = []
    for ego_id in scene.ids():
        state, _path = scene.participants[ego_id]
        front = front_vehicle(scene, ego_id, config.sensor_range_m, config.lane_offset_m)
        if front is None:
            continue
        if metric == "th":
            result = time_headway(front.dl_m, state.velocity, config.size_correction_m)
        else:
            result = time_to_collision(front.dl_m, front.dv_mps, config.size_correction_m)
        if not result.defined:
            continue
        events.append(
            RiskEvent(
                ego_id,
                t,
                float(state.position[0]),
                float(state.position[1]),
                float(state.velocity),
                result.inverse,
            )
        )
    return events


def _rsd_events_for_frame(
    dataset: TrajectoryDataset, frame: int, metric: str, config: RunConfig
) -> List[RiskEvent]:
    """Risk events of one frame, composed from the survival-module ops.

    Footprint sequences are built once per vehicle and pairwise collision
    profiles once per unordered pair, since both sides of a pair see the
    same profile; the result is identical to calling scene_risk per ego.
    """
    scene = dataset.scene_at(frame)
    t = dataset.time_of(frame)
    collision_cfg = config.collision()
    growth = config.growth()
    tau0 = config.effective_tau0_s()
    sequences: Dict[int, FootprintSequence] = {}
    pair_profiles: Dict[Tuple[int, int], np.ndarray] = {}

    def sequence_for(vid: int) -> FootprintSequence:
        if vid not in sequences:
            state, path = scene.participants[vid]
            pred = predict(
                state,
                path,
                behavior=config.behavior,
                growth=growth,
                s_max_s=config.s_max_s,
                ds_s=config.ds_s,
                vehicle_id=vid,
            )
            sequences[vid] = footprint_sequence(pred, collision_cfg)
        return sequences[vid]

    def profile_for(ego_id: int, partner_id: int) -> np.ndarray:
        key = (ego_id, partner_id) if ego_id < partner_id else (partner_id, ego_id)
        if key not in pair_profiles:
            pair_profiles[key] = profile_between(
                sequence_for(key[0]), sequence_for(key[1]), collision_cfg
            )
        return pair_profiles[key]

    events: List[RiskEvent] = []
    for ego_id in scene.ids():
        state, _path = scene.participants[ego_id]
        if metric == "rsd_front":
            front = front_vehicle(scene, ego_id, config.sensor_range_m, config.lane_offset_m)
            partner_ids = [front.vehicle_id] if front is not None else []
        else:
            partner_ids = neighbors_in_range(scene, ego_id, config.sensor_range_m)
        partner_ids = sorted(partner_ids)
        grid = sequence_for(ego_id).s_grid
        rates = [collision_rate(profile_for(ego_id, vid), config.dt_s) for vid in partner_ids]
        rate_profile = RateProfile(
            grid,
            tuple(partner_ids),
            np.vstack(rates) if rates else np.zeros((0, grid.shape[0])),
        )
        risk = integrated_risk(rate_profile, tau0)
        events.append(
            RiskEvent(
                ego_id,
                t,
                float(state.position[0]),
                float(state.position[1]),
                float(state.velocity),
                risk,
            )
        )
    return events


# Shared with forked pool workers; holds (dataset, metric, config) during a run.
_WORKER_STATE: dict = {}


def _evaluate_frames(frames) -> List[RiskEvent]:
    dataset = _WORKER_STATE["dataset"]
    metric = _WORKER_STATE["metric"]
    config = _WORKER_STATE["config"]
    worker = _baseline_events_for_frame if metric in ("th", "ttc") else _rsd_events_for_frame
    events: List[RiskEvent] = []
    for frame in frames:
        events.extend(worker(dataset, int(frame), metric, config))
    return events


def evaluate_dataset(
    dataset: TrajectoryDataset, metric: str, config: RunConfig
) -> List[RiskEvent]:
    """Evaluate a metric for every (ego, timestep) of a smoothed dataset.

    Baseline events exist only where the metric is defined; the
    probabilistic metric is defined everywhere (risk 0 without partners).
    The event list is sorted by (t, ego id) and is reproducible regardless
    of the parallelism degree.
    """
    metric = canonical_metric(metric)
    if not dataset.tracks:
        return []
    frames = list(dataset.frames())
    threads = config.threads if config.threads > 0 else (os.cpu_count() or 1)
    threads = min(threads, len(frames))
    _WORKER_STATE.update(dataset=dataset, metric=metric, config=config)
    try:
        if threads <= 1:
            events = _evaluate_frames(frames)
        else:
            chunks = [list(c) for c in np.array_split(frames, threads) if len(c)]
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=threads) as pool:
                parts = pool.map(_evaluate_frames, chunks)
            events = [event for part in parts for event in part]
    finally:
        _WORKER_STATE.clear()
    events.sort(key=lambda e: (e.t_s, e.ego_id))
    return events


def front_pairs_over_dataset(dataset: TrajectoryDataset, config: RunConfig) -> np.ndarray:
    """(dl, dv) for every timestep with a front vehicle, as an (M, 2) array."""
    pairs: List[Tuple[float, float]] = []
    for frame in dataset.frames():
        scene = dataset.scene_at(frame)
        for ego_id in scene.ids():
            front = front_vehicle(scene, ego_id, config.sensor_range_m, config.lane_offset_m)
            if front is not None:
                pairs.append((front.dl_m, front.dv_mps))
    return np.asarray(pairs, dtype=float).reshape(-1, 2)


@dataclass
class CriticalityBin:
    """One criticality level with its boundary values and member events.

    For fixed binning the boundaries are the configured natural-unit
    interval; for matched binning they are the first (most critical) and
    last member's ranking values.
    """

    label: str
    boundary_high: Optional[float]
    boundary_low: Optional[float]
    events: List[RiskEvent] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.events)


@dataclass
class CriticalityBinning:
    metric: str
    mode: str  # "fixed" | "matched"
    bins: List[CriticalityBin]
    unbinned_count: int

    @property
    def counts(self) -> List[int]:
        return [b.count for b in self.bins]

    @property
    def total_binned(self) -> int:
        return sum(self.counts)


def bin_fixed(
    events: Sequence[RiskEvent], boundaries: Sequence[Sequence[float]], metric: str
) -> CriticalityBinning:
    """Assign events to four fixed intervals given in natural units.

    Intervals are half-open [low, high) and scanned most-critical first;
    events outside every interval stay unbinned (they reflect safe
    behaviour, not an error).
    """
    metric = canonical_metric(metric)
    if len(boundaries) != len(BIN_LABELS):
        raise ConfigError(f"expected {len(BIN_LABELS)} intervals, got {len(boundaries)}")
    intervals = [(float(low), float(high)) for low, high in boundaries]
    for low, high in intervals:
        if not low < high:
            raise ConfigError(f"empty interval [{low}, {high})")
    for (l1, h1), (l2, h2) in zip(sorted(intervals), sorted(intervals)[1:]):
        if l2 < h1:
            raise ConfigError(f"overlapping intervals [{l1}, {h1}) and [{l2}, {h2})")
    bins = [
        CriticalityBin(label, high, low)
        for label, (low, high) in zip(BIN_LABELS, intervals)
    ]
    unbinned = 0
    for event in events:
        value = natural_value(metric, event.metric_value)
        for (low, high), bucket in zip(intervals, bins):
            if low <= value < high:
                bucket.events.append(event)
                break
        else:
            unbinned += 1
    return CriticalityBinning(metric, "fixed", bins, unbinned)


def bin_matched(
    events: Sequence[RiskEvent],
    reference_counts: Sequence[int],
    metric: str = "rsd_front",
) -> CriticalityBinning:
    """Fill bins with the most hazardous events until the reference counts
    are met; boundaries arise from the first and last member of each bin.

    Events are ranked by metric value descending with (t, ego id) as the
    deterministic tie-break.
    """
    metric = canonical_metric(metric)
    counts = [int(c) for c in reference_counts]
    if len(counts) != len(BIN_LABELS) or any(c < 0 for c in counts):
        raise BinningError(f"reference counts must be {len(BIN_LABELS)} non-negative integers")
    needed = sum(counts)
    if needed > len(events):
        raise BinCountError(
            f"reference counts need {needed} events but only {len(events)} are available "
            f"(shortfall {needed - len(events)})"
        )
    ranked = sorted(events, key=lambda e: (-e.metric_value, e.t_s, e.ego_id))
    bins: List[CriticalityBin] = []
    cursor = 0
    for label, count in zip(BIN_LABELS, counts):
        members = ranked[cursor : cursor + count]
        cursor += count
        if members:
            bins.append(
                CriticalityBin(label, members[0].metric_value, members[-1].metric_value, members)
            )
        else:
            bins.append(CriticalityBin(label, None, None, []))
    return CriticalityBinning(metric, "matched", bins, len(events) - cursor)


@dataclass
class CellStats:
    bin_index: int  # most critical bin observed in the cell (0 = dangerous)
    counts: List[int]  # events per criticality bin


@dataclass
class CriticalityMap:
    """Sparse grid of the most critical bin observed at each road cell."""

    origin_east_m: float
    origin_north_m: float
    cell_size_m: float
    cells: Dict[Tuple[int, int], CellStats] = field(default_factory=dict)

    @property
    def total_events(self) -> int:
        return sum(sum(c.counts) for c in self.cells.values())

    def absolute_cells(self) -> Dict[Tuple[int, int], CellStats]:
        """Cells keyed by absolute grid indices, comparable across maps of
        the same cell size."""
        de = round(self.origin_east_m / self.cell_size_m)
        dn = round(self.origin_north_m / self.cell_size_m)
        return {(ie + de, in_ + dn): stats for (ie, in_), stats in self.cells.items()}


def build_map(binning: CriticalityBinning, cell_size_m: float = 2.0) -> CriticalityMap:
    """Rasterize binned events by ego position, keeping the most critical
    bin per cell."""
    if cell_size_m <= 0.0:
        raise ValueError(f"cell_size_m must be > 0, got {cell_size_m}")
    tagged = [
        (index, event)
        for index, bucket in enumerate(binning.bins)
        for event in bucket.events
    ]
    if not tagged:
        return CriticalityMap(0.0, 0.0, cell_size_m)
    east = np.array([e.east_m for _i, e in tagged])
    north = np.array([e.north_m for _i, e in tagged])
    origin_e = math.floor(east.min() / cell_size_m) * cell_size_m
    origin_n = math.floor(north.min() / cell_size_m) * cell_size_m
    grid = CriticalityMap(origin_e, origin_n, cell_size_m)
    for (index, event), e, n in zip(tagged, east, north):
        key = (int((e - origin_e) // cell_size_m), int((n - origin_n) // cell_size_m))
        stats = grid.cells.get(key)
        if stats is None:
            stats = CellStats(index, [0] * len(BIN_LABELS))
            grid.cells[key] = stats
        stats.bin_index = min(stats.bin_index, index)
        stats.counts[index] += 1
    return grid


def velocity_histograms(
    binning: CriticalityBinning, bin_width_mps: float = 1.0
) -> Dict[str, HistogramStats]:
    """Ego-velocity pmf/cdf per criticality bin."""
    return {
        bucket.label: HistogramStats.from_samples(
            "v", [e.ego_velocity_mps for e in bucket.events], bin_width_mps
        )
        for bucket in binning.bins
    }
