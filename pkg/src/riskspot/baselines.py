"""Time Headway and Time-To-Collision reference metrics.

Both operate on the longitudinal gap dl = l_ego - l_front (negative when the
other vehicle is ahead) and apply a car-size correction before dividing, so
the times refer to bumper contact rather than centre coincidence. Undefined
results are valid outputs: they mark states these metrics simply cannot rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

__all__ = [
    "BaselineResult",
    "time_headway",
    "time_to_collision",
    "TH_MIN_VELOCITY",
    "TTC_MIN_CLOSING_SPEED",
]

# Below this speed TH would blow up on numeric dust; treat it as undefined.
TH_MIN_VELOCITY = 0.1

# Closing-speed floor for TTC: a nanometre per second is float noise from the
# smoothing arithmetic, not a physical approach, and would yield 1e16-second
# "collisions".
TTC_MIN_CLOSING_SPEED = 1e-9


@dataclass(frozen=True)
class BaselineResult:
    kind: str  # "th" | "ttc"
    value: Optional[float]  # seconds, > 0 when defined

    @property
    def defined(self) -> bool:
        return self.value is not None

    @property
    def inverse(self) -> float:
        """1/value as a criticality proxy; 0 when undefined."""
        return 0.0 if self.value is None else 1.0 / self.value


def time_headway(dl_m: float, v_ego_mps: float, size_correction_m: float = 4.0) -> BaselineResult:
    """Time for the ego to reach the front vehicle's current position.

    Defined only with the (size-corrected) gap open ahead and the ego
    actually moving.
    """
    dl_star = dl_m + size_correction_m
    if -dl_star > 0.0 and v_ego_mps > TH_MIN_VELOCITY:
        return BaselineResult("th", -dl_star / v_ego_mps)
    return BaselineResult("th", None)


def time_to_collision(dl_m: float, dv_mps: float, size_correction_m: float = 4.0) -> BaselineResult:
    """Time until both vehicles coincide under constant speeds.

    Defined only while the gap is open ahead and closing (dv > 0).
    """
    dl_star = dl_m + size_correction_m
    if -dl_star > 0.0 and dv_mps > TTC_MIN_CLOSING_SPEED:
        return BaselineResult("ttc", -dl_star / dv_mps)
    return BaselineResult("ttc", None)
