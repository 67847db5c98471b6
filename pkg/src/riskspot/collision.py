"""Instantaneous collision probability between uncertain vehicle footprints.

Each vehicle's position at a predicted time is a 2D Gaussian whose
longitudinal spread grows over the horizon. The overlap integral of two such
densities, scaled by a cross-section constant, gives the probability of both
vehicles occupying the same spot. On curved paths a footprint can be split
into a weighted mixture of smaller components placed along the path so the
distribution bends with the curve instead of cutting across it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Path, poses_at_arclengths

__all__ = [
    "DegenerateCovarianceError",
    "UncertaintyGrowth",
    "GaussianFootprint",
    "CollisionConfig",
    "FootprintSequence",
    "FWHM_FACTOR",
    "gaussian_1d_overlap",
    "rotate_covariance",
    "gaussian_2d_overlap",
    "sigma_growth",
    "build_pmm",
    "plain_footprint",
    "collision_probability",
    "collision_profile",
    "footprint_sequence",
    "profile_between",
    "mixture_arrays_along_path",
    "pmm_profile_is_unimodal",
]

# Full width at half maximum of a unit Gaussian.
FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))

_MAX_CONDITION = 1e12


class DegenerateCovarianceError(ValueError):
    """Summed covariance too ill-conditioned for a meaningful overlap."""


GROWTH_BROWNIAN = "brownian"
GROWTH_VELOCITY = "velocity"
_GROWTH_KINDS = (GROWTH_BROWNIAN, GROWTH_VELOCITY)


@dataclass(frozen=True)
class UncertaintyGrowth:
    """How longitudinal position uncertainty grows over prediction time.

    ``velocity``: sigma accumulates c * v(s) * ds per step, so a stopped
    vehicle keeps its small measurement uncertainty. ``brownian``: diffusion
    sigma(s) = sqrt(sigma0^2 + D s), independent of speed (comparison mode).
    """

    kind: str = GROWTH_VELOCITY
    sigma0_m: float = 2.0 / 3.0  # 6 sigma0 = 4 m average vehicle length
    velocity_factor: float = 0.1  # c, dimensionless
    diffusion_m2_s: float = 0.25  # D, brownian kind only

    def __post_init__(self) -> None:
        if self.kind not in _GROWTH_KINDS:
            raise ValueError(f"unknown growth kind {self.kind!r}, expected one of {_GROWTH_KINDS}")
        if self.sigma0_m <= 0.0:
            raise ValueError(f"sigma0_m must be > 0, got {self.sigma0_m}")
        if self.velocity_factor < 0.0:
            raise ValueError(f"velocity_factor must be >= 0, got {self.velocity_factor}")
        if self.diffusion_m2_s < 0.0:
            raise ValueError(f"diffusion_m2_s must be >= 0, got {self.diffusion_m2_s}")


def sigma_growth(growth: UncertaintyGrowth, v_profile, ds_s: float) -> np.ndarray:
    """Longitudinal sigma at every prediction sample of a velocity profile.

    The velocity kind integrates c * v(s) with a left-rectangle rule from
    sigma(0) = sigma0; both kinds yield a non-decreasing sequence.
    """
    v = np.asarray(v_profile, dtype=float)
    if np.any(v < 0.0):
        raise ValueError("velocity profile must be non-negative")
    if ds_s <= 0.0:
        raise ValueError(f"ds_s must be > 0, got {ds_s}")
    n = v.shape[0]
    if growth.kind == GROWTH_BROWNIAN:
        s = np.arange(n) * ds_s
        return np.sqrt(growth.sigma0_m**2 + growth.diffusion_m2_s * s)
    steps = growth.velocity_factor * v[:-1] * ds_s
    return growth.sigma0_m + np.concatenate(([0.0], np.cumsum(steps)))


def gaussian_1d_overlap(mu1: float, sigma1: float, mu2: float, sigma2: float) -> float:
    """Integral of the product of two 1D Gaussian densities (units 1/m)."""
    if sigma1 <= 0.0 or sigma2 <= 0.0:
        raise ValueError("standard deviations must be > 0")
    var = sigma1 * sigma1 + sigma2 * sigma2
    return math.exp(-((mu2 - mu1) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def rotate_covariance(var_lon: float, var_lat: float, heading: float) -> np.ndarray:
    """Rotate diag(var_lon, var_lat) by a heading angle: R diag R^T."""
    if var_lon <= 0.0 or var_lat <= 0.0:
        raise ValueError("variances must be > 0")
    c = math.cos(heading)
    s = math.sin(heading)
    off = c * s * (var_lon - var_lat)
    return np.array(
        [
            [c * c * var_lon + s * s * var_lat, off],
            [off, s * s * var_lon + c * c * var_lat],
        ]
    )


def _rotate_covariance_batch(var_lon, var_lat, headings) -> np.ndarray:
    """Batched rotate_covariance. Broadcasts var_lon/var_lat against headings."""
    h = np.asarray(headings, dtype=float)
    c = np.cos(h)
    s = np.sin(h)
    lon = np.broadcast_to(np.asarray(var_lon, dtype=float), h.shape)
    lat = np.broadcast_to(np.asarray(var_lat, dtype=float), h.shape)
    out = np.empty(h.shape + (2, 2))
    out[..., 0, 0] = c * c * lon + s * s * lat
    out[..., 1, 1] = s * s * lon + c * c * lat
    out[..., 0, 1] = out[..., 1, 0] = c * s * (lon - lat)
    return out


def gaussian_2d_overlap(mu1, cov1, mu2, cov2) -> float:
    """Integral of the product of two bivariate Gaussian densities (1/m^2).

    Evaluates |2 pi (S1 + S2)|^(-1/2) exp(-0.5 d^T (S1 + S2)^(-1) d) with
    d = mu2 - mu1. Symmetric in its arguments.
    """
    s = np.asarray(cov1, dtype=float) + np.asarray(cov2, dtype=float)
    a, b = s[0, 0], s[0, 1]
    c, d = s[1, 0], s[1, 1]
    det = a * d - b * c
    tr = a + d
    disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
    lam_min = (tr - disc) / 2.0
    lam_max = (tr + disc) / 2.0
    if det <= 0.0 or lam_min <= 0.0 or lam_max > _MAX_CONDITION * lam_min:
        raise DegenerateCovarianceError(
            f"summed covariance is numerically degenerate (det={det:.3e})"
        )
    du = np.asarray(mu2, dtype=float) - np.asarray(mu1, dtype=float)
    quad = (d * du[0] * du[0] - (b + c) * du[0] * du[1] + a * du[1] * du[1]) / det
    return math.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


@dataclass
class GaussianFootprint:
    """Gaussian position footprint, optionally a mixture bent along a path.

    ``weights``/``means``/``covs`` always hold the component representation;
    a plain footprint is the single-component case with weight 1. ``mean``
    and ``cov`` describe the nominal unsplit Gaussian.
    """

    mean: np.ndarray
    cov: np.ndarray
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.covs = np.asarray(self.covs, dtype=float)
        if self.weights.shape[0] % 2 == 0:
            raise ValueError("component count must be odd")
        if np.any(self.weights <= 0.0):
            raise ValueError("component weights must be > 0")

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    def density(self, points):
        """Mixture density at (..., 2) points; a single point gives a float."""
        raw = np.asarray(points, dtype=float)
        p = np.atleast_2d(raw)
        vals = np.zeros(p.shape[:-1])
        for w, m, c in zip(self.weights, self.means, self.covs):
            det = c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]
            du = p - m
            quad = (
                c[1, 1] * du[..., 0] ** 2
                - 2.0 * c[0, 1] * du[..., 0] * du[..., 1]
                + c[0, 0] * du[..., 1] ** 2
            ) / det
            vals += w * np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
        if raw.ndim == 1:
            return float(vals[0])
        return vals


def plain_footprint(position, heading: float, sigma_lon: float, sigma_lat: float) -> GaussianFootprint:
    """Single elongated Gaussian footprint rotated to a heading."""
    cov = rotate_covariance(sigma_lon**2, sigma_lat**2, heading)
    mean = np.asarray(position, dtype=float)
    return GaussianFootprint(mean, cov, np.ones(1), mean[None, :], cov[None, :, :])


def _pmm_layout(sigma_lon: float, n_components: int, overlap_factor: float):
    """Longitudinal offsets, component sigma and peak-matching weights.

    Components sit at offsets 2k sigma_lon / N for k = 0, ..., +-(N-1)/2 with
    sigma_k = overlap_factor * FWHM * sigma_lon / N; the weights scale the
    collective component peaks to the original profile so the mixture equals
    the original Gaussian exactly at the centre.
    """
    half = (n_components - 1) // 2
    k = np.arange(-half, half + 1, dtype=float)
    offsets = 2.0 * k * sigma_lon / n_components
    sigma_k = overlap_factor * FWHM_FACTOR * sigma_lon / n_components
    f_at_centers = np.exp(-(offsets**2) / (2.0 * sigma_lon**2)) / (
        sigma_lon * math.sqrt(2.0 * math.pi)
    )
    fk_at_mu = np.exp(-(offsets**2) / (2.0 * sigma_k**2)) / (sigma_k * math.sqrt(2.0 * math.pi))
    peak = 1.0 / (sigma_lon * math.sqrt(2.0 * math.pi))
    weights = f_at_centers * peak / np.sum(f_at_centers * fk_at_mu)
    return offsets, sigma_k, weights


def _validate_pmm_params(n_components: int, overlap_factor: float) -> None:
    if n_components < 1 or n_components % 2 == 0:
        raise ValueError(f"component count must be odd and >= 1, got {n_components}")
    if n_components > 1 and overlap_factor <= 1.0:
        raise ValueError(f"overlap factor must be > 1, got {overlap_factor}")


def build_pmm(
    mean,
    sigma_lon: float,
    sigma_lat: float,
    heading: float,
    path: Optional[Path],
    center_arclength: float,
    n_components: int,
    overlap_factor: float,
) -> GaussianFootprint:
    """Split an elongated footprint into components placed along a path.

    Component centres are offset longitudinally from ``center_arclength`` and
    positioned via the path's arc-length lookup, each rotated to the local
    path heading, which bends the footprint along curves. ``n_components=1``
    returns the plain footprint unchanged. ``mean``/``heading`` must be the
    pose at ``center_arclength`` for the centre component to coincide with
    the nominal mean.
    """
    _validate_pmm_params(n_components, overlap_factor)
    if n_components == 1:
        return plain_footprint(mean, heading, sigma_lon, sigma_lat)
    if path is None:
        raise ValueError("a path is required for a multi-component footprint")
    offsets, sigma_k, weights = _pmm_layout(sigma_lon, n_components, overlap_factor)
    positions, headings = poses_at_arclengths(path, center_arclength + offsets)
    covs = _rotate_covariance_batch(sigma_k**2, sigma_lat**2, headings)
    nominal_cov = rotate_covariance(sigma_lon**2, sigma_lat**2, heading)
    return GaussianFootprint(np.asarray(mean, dtype=float), nominal_cov, weights, positions, covs)


def _overlap_grid(means1, covs1, means2, covs2) -> np.ndarray:
    """Pairwise 2D overlap densities for component arrays.

    means1 (..., J, 2) x means2 (..., K, 2) -> (..., J, K). Covariances must
    be symmetric (internally built ones are).
    """
    s = covs1[..., :, None, :, :] + covs2[..., None, :, :, :]
    a = s[..., 0, 0]
    b = s[..., 0, 1]
    d = s[..., 1, 1]
    det = a * d - b * b
    if np.any(det <= 0.0):
        raise DegenerateCovarianceError("summed component covariance not positive definite")
    dx = means2[..., None, :, 0] - means1[..., :, None, 0]
    dy = means2[..., None, :, 1] - means1[..., :, None, 1]
    quad = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det
    return np.exp(-0.5 * quad) / (2.0 * math.pi * np.sqrt(det))


def collision_probability(
    f1: GaussianFootprint, f2: GaussianFootprint, cross_section_m2: float
) -> float:
    """Probability of both vehicles occupying the same spot, in [0, 1].

    The mixture overlap integral is exactly the weighted sum of pairwise
    component overlaps; the cross-section constant converts the overlap
    density (1/m^2) into a probability, clamped to [0, 1].
    """
    if cross_section_m2 <= 0.0:
        raise ValueError(f"cross_section_m2 must be > 0, got {cross_section_m2}")
    grid = _overlap_grid(f1.means, f1.covs, f2.means, f2.covs)
    value = cross_section_m2 * float(f1.weights @ grid @ f2.weights)
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class CollisionConfig:
    """Parameters of the footprint model shared by all pairwise evaluations."""

    sigma_lat_m: float = 1.0 / 3.0  # 6 sigma_lat = 2 m vehicle width, constant over s
    cross_section_m2: float = 8.0  # 4 m x 2 m vehicle cross-section
    pmm_enabled: bool = True
    pmm_components: int = 15
    pmm_overlap_factor: float = 1.2
    growth: UncertaintyGrowth = field(default_factory=UncertaintyGrowth)

    def __post_init__(self) -> None:
        if self.sigma_lat_m <= 0.0:
            raise ValueError(f"sigma_lat_m must be > 0, got {self.sigma_lat_m}")
        if self.cross_section_m2 <= 0.0:
            raise ValueError(f"cross_section_m2 must be > 0, got {self.cross_section_m2}")
        _validate_pmm_params(self.pmm_components, self.pmm_overlap_factor)

    @property
    def effective_components(self) -> int:
        return self.pmm_components if self.pmm_enabled else 1


def mixture_arrays_along_path(
    path: Path,
    arclengths,
    sigma_lon,
    sigma_lat: float,
    n_components: int,
    overlap_factor: float,
):
    """Component weights/means/covariances for a whole prediction.

    Returns ``(weights (S, K), means (S, K, 2), covs (S, K, 2, 2))`` with
    K = n_components; K = 1 yields the plain rotated footprint per sample.
    """
    _validate_pmm_params(n_components, overlap_factor)
    ls = np.asarray(arclengths, dtype=float)
    lon = np.asarray(sigma_lon, dtype=float)
    if n_components == 1:
        positions, headings = poses_at_arclengths(path, ls)
        covs = _rotate_covariance_batch(lon**2, sigma_lat**2, headings)
        return np.ones(ls.shape + (1,)), positions[..., None, :], covs[..., None, :, :]

    half = (n_components - 1) // 2
    k = np.arange(-half, half + 1, dtype=float)
    offsets = 2.0 * k[None, :] * lon[:, None] / n_components  # (S, K)
    sigma_k = overlap_factor * FWHM_FACTOR * lon / n_components  # (S,)
    f_at_centers = np.exp(-(offsets**2) / (2.0 * lon[:, None] ** 2)) / (
        lon[:, None] * math.sqrt(2.0 * math.pi)
    )
    fk_at_mu = np.exp(-(offsets**2) / (2.0 * sigma_k[:, None] ** 2)) / (
        sigma_k[:, None] * math.sqrt(2.0 * math.pi)
    )
    peak = 1.0 / (lon[:, None] * math.sqrt(2.0 * math.pi))
    weights = f_at_centers * peak / np.sum(f_at_centers * fk_at_mu, axis=1, keepdims=True)
    positions, headings = poses_at_arclengths(path, ls[:, None] + offsets)
    covs = _rotate_covariance_batch(sigma_k[:, None] ** 2, sigma_lat**2, headings)
    return weights, positions, covs


@dataclass
class FootprintSequence:
    """Per-sample footprint component arrays of one predicted trajectory.

    Building this once per vehicle and timestep lets every pairwise profile
    against it reuse the component placement work.
    """

    s_grid: np.ndarray
    positions: np.ndarray  # (S, 2) plain means, for distance gating
    sigma_lon: np.ndarray  # (S,), for gating
    weights: np.ndarray  # (S, K)
    means: np.ndarray  # (S, K, 2)
    covs: np.ndarray  # (S, K, 2, 2)


def footprint_sequence(pred, config: CollisionConfig) -> FootprintSequence:
    """Component weights/means/covariances for every sample of a prediction."""
    weights, means, covs = mixture_arrays_along_path(
        pred.path,
        pred.arclength,
        pred.sigma_lon,
        config.sigma_lat_m,
        config.effective_components,
        config.pmm_overlap_factor,
    )
    return FootprintSequence(pred.s_grid, pred.positions, pred.sigma_lon, weights, means, covs)


# Samples are skipped once every component pair is at least this many
# combined standard deviations apart; exp(-7^2/2) with the worst-case
# density prefactor bounds the discarded probability below 1e-9, two orders
# under the smallest criticality boundaries seen on real data.
_GATE_SIGMAS = 7.0


def _footprint_reach(seq: FootprintSequence, config: CollisionConfig) -> np.ndarray:
    """Distance from the plain mean beyond which a footprint's density is
    negligible: the component span plus the gate margin of kernel widths."""
    k = config.effective_components
    if k > 1:
        span = (k - 1) / k
        kernel = config.pmm_overlap_factor * FWHM_FACTOR / k
        return seq.sigma_lon * (span + _GATE_SIGMAS * kernel) + _GATE_SIGMAS * config.sigma_lat_m
    return _GATE_SIGMAS * (seq.sigma_lon + config.sigma_lat_m)


def profile_between(
    seq1: FootprintSequence, seq2: FootprintSequence, config: CollisionConfig
) -> np.ndarray:
    """Collision probability per sample from two footprint sequences.

    Samples whose footprints cannot meaningfully overlap (all component
    pairs beyond the gate margin) are exact zeros.
    """
    if seq1.s_grid.shape != seq2.s_grid.shape:
        raise ValueError("predictions must share the same sample grid")
    n = seq1.s_grid.shape[0]
    p_coll = np.zeros(n)
    gate = _footprint_reach(seq1, config) + _footprint_reach(seq2, config)
    dist = np.hypot(
        seq1.positions[:, 0] - seq2.positions[:, 0],
        seq1.positions[:, 1] - seq2.positions[:, 1],
    )
    idx = np.nonzero(dist < gate)[0]
    if idx.size == 0:
        return p_coll
    # Component-scalar arithmetic: (n_active, K, K) arrays throughout, no
    # (..., 2, 2) temporaries.
    c1 = seq1.covs[idx]
    c2 = seq2.covs[idx]
    a = c1[:, :, None, 0, 0] + c2[:, None, :, 0, 0]
    b = c1[:, :, None, 0, 1] + c2[:, None, :, 0, 1]
    d = c1[:, :, None, 1, 1] + c2[:, None, :, 1, 1]
    det = a * d - b * b
    if np.any(det <= 0.0):
        raise DegenerateCovarianceError("summed component covariance not positive definite")
    dx = seq2.means[idx, None, :, 0] - seq1.means[idx, :, None, 0]
    dy = seq2.means[idx, None, :, 1] - seq1.means[idx, :, None, 1]
    quad = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det
    overlap = np.exp(-0.5 * quad) / (2.0 * math.pi * np.sqrt(det))
    vals = config.cross_section_m2 * np.einsum(
        "sj,sjk,sk->s", seq1.weights[idx], overlap, seq2.weights[idx]
    )
    p_coll[idx] = np.clip(vals, 0.0, 1.0)
    return p_coll


def collision_profile(pred1, pred2, config: CollisionConfig) -> np.ndarray:
    """Collision probability at every shared prediction sample of two
    predicted trajectories."""
    return profile_between(
        footprint_sequence(pred1, config), footprint_sequence(pred2, config), config
    )


def pmm_profile_is_unimodal(
    n_components: int, overlap_factor: float, samples: int = 4001
) -> bool:
    """Whether the 1D longitudinal mixture has a single local maximum.

    Used as a startup sanity check on the overlap factor: sampled densely
    over the component span plus tails, the profile must rise to one peak
    and fall off monotonically.
    """
    _validate_pmm_params(n_components, overlap_factor)
    if n_components == 1:
        return True
    sigma = 1.0
    offsets, sigma_k, weights = _pmm_layout(sigma, n_components, overlap_factor)
    x = np.linspace(-2.0 * sigma, 2.0 * sigma, samples)
    profile = np.sum(
        weights[None, :]
        * np.exp(-((x[:, None] - offsets[None, :]) ** 2) / (2.0 * sigma_k**2))
        / (sigma_k * math.sqrt(2.0 * math.pi)),
        axis=1,
    )
    diffs = np.diff(profile)
    signs = np.sign(diffs[np.abs(diffs) > 1e-15 * profile.max()])
    flips = np.count_nonzero(np.diff(signs) != 0)
    return flips <= 1
