"""Event-rate composition, survival weighting, and integrated scene risk.

Instantaneous collision probabilities become event rates of an inhomogeneous
Poisson process; a constant escape rate models mitigating influences. The
survival function discounts events that can only happen if nothing else
happened first, and the integrated risk R(t) in [0, 1] accumulates the
discounted critical-event density over the prediction horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .collision import CollisionConfig, collision_profile

__all__ = [
    "GridAlignmentError",
    "RateProfile",
    "RiskProfile",
    "collision_rate",
    "survival_function",
    "integrated_risk",
    "scene_risk",
]


class GridAlignmentError(ValueError):
    """Trajectories or rate profiles do not share the same prediction grid."""


@dataclass
class RateProfile:
    """Critical event rate over the prediction grid, split per partner.

    ``curvature_rate`` is a structural slot for non-collision risk types; it
    is fixed to zero here but participates in the total so additional rates
    can be added without interface changes.
    """

    s_grid: np.ndarray
    partner_ids: Tuple[int, ...] = ()
    partner_rates: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    curvature_rate: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.s_grid = np.asarray(self.s_grid, dtype=float)
        self.partner_rates = np.asarray(self.partner_rates, dtype=float)
        n = self.s_grid.shape[0]
        if n < 2:
            raise GridAlignmentError("rate profile needs at least two samples")
        steps = np.diff(self.s_grid)
        self._ds = float(steps[0])
        if not np.allclose(steps, self._ds, rtol=0.0, atol=1e-9):
            raise GridAlignmentError("rate profile grid must be uniformly spaced")
        if self.partner_rates.size == 0:
            self.partner_rates = np.zeros((len(self.partner_ids), n))
        if self.partner_rates.shape != (len(self.partner_ids), n):
            raise GridAlignmentError(
                f"partner rates shaped {self.partner_rates.shape}, expected "
                f"({len(self.partner_ids)}, {n})"
            )
        if self.curvature_rate is None:
            self.curvature_rate = np.zeros(n)
        if np.any(self.partner_rates < 0.0) or np.any(self.curvature_rate < 0.0):
            raise ValueError("event rates must be non-negative")

    @property
    def ds(self) -> float:
        return self._ds

    @property
    def total(self) -> np.ndarray:
        return self.partner_rates.sum(axis=0) + self.curvature_rate


@dataclass
class RiskProfile:
    """Integrated future risk of one ego vehicle at one timestep."""

    ego_id: int
    t_s: float
    risk: float
    survival: np.ndarray
    rate: RateProfile


def collision_rate(p_coll_samples, dt_s: float) -> np.ndarray:
    """Event rate (1/s) from collision probabilities over intervals dt."""
    if dt_s <= 0.0:
        raise ValueError(f"dt_s must be > 0, got {dt_s}")
    p = np.asarray(p_coll_samples, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("collision probabilities must lie in [0, 1]")
    return p / dt_s


def survival_function(rate: RateProfile, tau0_s: float) -> np.ndarray:
    """Probability that no event occurred up to each grid sample.

    S(s) = exp(-integral of (1/tau0 + rate_crit)), accumulated with a
    left-rectangle rule on the grid; S(0) = 1 exactly. ``tau0_s`` may be
    ``inf`` to disable the escape rate.
    """
    if tau0_s <= 0.0:
        raise ValueError(f"tau0_s must be > 0, got {tau0_s}")
    hazard = 1.0 / tau0_s + rate.total
    ds = rate.ds
    integral = np.concatenate(([0.0], np.cumsum(hazard[:-1] * ds)))
    return np.exp(-integral)


def integrated_risk(rate: RateProfile, tau0_s: float, s_max_s: float | None = None) -> float:
    """Accumulated future risk in [0, 1].

    Left-rectangle sum of rate * survival over cells whose left endpoint lies
    before the horizon; the default horizon is the grid end.
    """
    surv = survival_function(rate, tau0_s)
    ds = rate.ds
    if s_max_s is None:
        m = rate.s_grid.shape[0] - 1
    else:
        m = int(np.count_nonzero(rate.s_grid[:-1] < s_max_s - 1e-12 * max(1.0, s_max_s)))
    total = rate.total
    value = float(np.sum(total[:m] * surv[:m]) * ds)
    return min(max(value, 0.0), 1.0)


def scene_risk(
    ego,
    partners: Sequence,
    config: CollisionConfig,
    tau0_s: float = 3.0,
    dt_s: float = 0.1,
    t_s: float = 0.0,
) -> RiskProfile:
    """Risk of an ego vehicle against all interaction partners.

    Per-partner collision probabilities are converted to rates and summed
    into one critical event rate, so simultaneous threats compose linearly;
    the per-partner components are retained for diagnostics.
    """
    grid = ego.s_grid
    rates: List[np.ndarray] = []
    ids: List[int] = []
    for partner in partners:
        if partner.s_grid.shape != grid.shape or not np.allclose(
            partner.s_grid, grid, rtol=0.0, atol=1e-12
        ):
            raise GridAlignmentError(
                f"partner {partner.vehicle_id} prediction grid differs from ego grid"
            )
        # Canonical argument order: the overlap is symmetric, but fixing the
        # order keeps the floats bit-identical no matter which side is ego.
        if partner.vehicle_id < ego.vehicle_id:
            p_coll = collision_profile(partner, ego, config)
        else:
            p_coll = collision_profile(ego, partner, config)
        rates.append(collision_rate(p_coll, dt_s))
        ids.append(partner.vehicle_id)
    profile = RateProfile(
        grid,
        tuple(ids),
        np.vstack(rates) if rates else np.zeros((0, grid.shape[0])),
    )
    surv = survival_function(profile, tau0_s)
    risk = integrated_risk(profile, tau0_s)
    return RiskProfile(ego.vehicle_id, t_s, risk, surv, profile)
