"""Run configuration: every tunable of the pipeline in one flat document.

Keys carry their unit in the name (``s_max_s``, ``sigma0_m``) because unit
mix-ups are the dominant failure mode for this kind of math. Config files
are JSON objects with exactly these keys; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Tuple

from .collision import CollisionConfig, UncertaintyGrowth, pmm_profile_is_unimodal
from .ingest import ColumnSchema

__all__ = ["ConfigError", "RunConfig"]


class ConfigError(ValueError):
    """Invalid or unknown configuration values."""


_ESCAPE_MODES = ("time", "rate")
_GROWTH_KINDS = ("velocity", "brownian")
_BEHAVIORS = ("constant_velocity", "sudden_stop")


@dataclass
class RunConfig:
    # Time discretization
    dt_s: float = 0.1  # data frame step; also the event-rate interval
    ds_s: float = 0.1  # prediction sample step
    s_max_s: float = 12.0  # prediction horizon

    # Survival analysis
    tau0_s: float = 3.0
    escape_mode: str = "time"  # "time": tau0_s is a time constant; "rate": a rate in 1/s

    # Footprint uncertainty
    sigma0_m: float = 2.0 / 3.0
    sigma_lat_m: float = 1.0 / 3.0
    velocity_factor: float = 0.1
    diffusion_m2_s: float = 0.25
    growth_kind: str = "velocity"
    cross_section_m2: float = 8.0
    pmm_enabled: bool = True
    pmm_components: int = 15
    pmm_overlap_factor: float = 1.2

    # Scene interaction
    sensor_range_m: float = 50.0
    lane_offset_m: float = 1.8
    size_correction_m: float = 4.0
    behavior: str = "constant_velocity"

    # Ingest and smoothing
    smooth_pos_s: float = 10.0
    smooth_vel_s: float = 20.0
    smooth_acc_s: float = 80.0
    feet_to_meters: bool = True
    col_vehicle_id: str = "Vehicle_ID"
    col_frame: str = "Frame_ID"
    col_x: str = "Local_X"
    col_y: str = "Local_Y"
    col_vehicle_class: str = "v_Class"

    # Binning and mapping
    th_bins_s: Tuple[Tuple[float, float], ...] = (
        (0.0, 0.5),
        (0.5, 1.0),
        (1.0, 2.0),
        (2.0, 4.0),
    )
    cell_size_m: float = 2.0
    v_bin_width_mps: float = 1.0
    a_bin_width_mps2: float = 0.1
    gap_bin_width_m: float = 1.0
    dv_bin_width_mps: float = 0.5

    # Execution
    threads: int = 0  # 0 = all available cores
    seed: int = 0  # synthetic corpora only; the pipeline itself is deterministic

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        positive = (
            "dt_s",
            "ds_s",
            "s_max_s",
            "tau0_s",
            "sigma0_m",
            "sigma_lat_m",
            "cross_section_m2",
            "sensor_range_m",
            "lane_offset_m",
            "smooth_pos_s",
            "smooth_vel_s",
            "smooth_acc_s",
            "cell_size_m",
            "v_bin_width_mps",
            "a_bin_width_mps2",
            "gap_bin_width_m",
            "dv_bin_width_mps",
        )
        for name in positive:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        if self.velocity_factor < 0 or self.diffusion_m2_s < 0 or self.size_correction_m < 0:
            raise ConfigError("velocity_factor, diffusion_m2_s and size_correction_m must be >= 0")
        if self.s_max_s < self.ds_s:
            raise ConfigError("s_max_s must be at least ds_s")
        if self.escape_mode not in _ESCAPE_MODES:
            raise ConfigError(f"escape_mode must be one of {_ESCAPE_MODES}, got {self.escape_mode!r}")
        if self.growth_kind not in _GROWTH_KINDS:
            raise ConfigError(f"growth_kind must be one of {_GROWTH_KINDS}, got {self.growth_kind!r}")
        if self.behavior not in _BEHAVIORS:
            raise ConfigError(f"behavior must be one of {_BEHAVIORS}, got {self.behavior!r}")
        if self.pmm_components < 1 or self.pmm_components % 2 == 0:
            raise ConfigError(f"pmm_components must be odd and >= 1, got {self.pmm_components}")
        if self.pmm_components > 1 and self.pmm_overlap_factor <= 1.0:
            raise ConfigError(f"pmm_overlap_factor must be > 1, got {self.pmm_overlap_factor}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")
        bins = self.th_bins_s
        if len(bins) != 4 or any(len(b) != 2 for b in bins):
            raise ConfigError("th_bins_s must hold exactly four [low, high] intervals")
        for low, high in bins:
            if not (0 <= low < high):
                raise ConfigError(f"invalid TH bin [{low}, {high}]")
        lows = [b[0] for b in bins]
        if lows != sorted(lows):
            raise ConfigError(
                "th_bins_s must be ordered most-to-least critical (ascending headway)"
            )
        if self.pmm_enabled and self.pmm_components > 1:
            if not pmm_profile_is_unimodal(self.pmm_components, self.pmm_overlap_factor):
                raise ConfigError(
                    "pmm_overlap_factor produces a rippled mixture profile "
                    f"({self.pmm_overlap_factor} with {self.pmm_components} components)"
                )

    # Adapters into the module-level parameter objects.

    def growth(self) -> UncertaintyGrowth:
        return UncertaintyGrowth(
            kind=self.growth_kind,
            sigma0_m=self.sigma0_m,
            velocity_factor=self.velocity_factor,
            diffusion_m2_s=self.diffusion_m2_s,
        )

    def collision(self) -> CollisionConfig:
        return CollisionConfig(
            sigma_lat_m=self.sigma_lat_m,
            cross_section_m2=self.cross_section_m2,
            pmm_enabled=self.pmm_enabled,
            pmm_components=self.pmm_components,
            pmm_overlap_factor=self.pmm_overlap_factor,
            growth=self.growth(),
        )

    def schema(self) -> ColumnSchema:
        return ColumnSchema(
            vehicle_id=self.col_vehicle_id,
            frame=self.col_frame,
            x=self.col_x,
            y=self.col_y,
            vehicle_class=self.col_vehicle_class,
        )

    def effective_tau0_s(self) -> float:
        """Escape time constant in seconds under the configured reading."""
        return self.tau0_s if self.escape_mode == "time" else 1.0 / self.tau0_s

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        if not isinstance(values, dict):
            raise ConfigError("config document must be a JSON object")
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if "th_bins_s" in values:
            try:
                values = dict(values, th_bins_s=tuple(tuple(b) for b in values["th_bins_s"]))
            except TypeError as exc:
                raise ConfigError("th_bins_s must be a list of [low, high] pairs") from exc
        try:
            return cls(**values)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(document)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["th_bins_s"] = [list(b) for b in self.th_bins_s]
        return out
