"""Shared fixtures: synthetic corpora, small-width smoothing configs, oracles."""

import csv
import math

import numpy as np
import pytest

from riskspot import Path, RunConfig


@pytest.fixture
def straight_path():
    return Path([[0.0, 0.0], [10.0, 0.0]])


@pytest.fixture
def l_path():
    return Path([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])


def make_test_config(**overrides) -> RunConfig:
    """Config for synthetic metre-unit corpora.

    Smoothing widths are shrunk so the zero-phase filter transients die
    within a few samples; the production defaults (10/20/80 s) need tracks
    far longer than these corpora.
    """
    base = dict(
        feet_to_meters=False,
        smooth_pos_s=0.2,
        smooth_vel_s=0.2,
        smooth_acc_s=0.2,
        threads=1,
    )
    base.update(overrides)
    return RunConfig(**base)


@pytest.fixture
def test_config():
    return make_test_config()


def write_trajectory_csv(path, vehicles, dt_s=0.1):
    """Write an NGSIM-shaped CSV (metres) from per-vehicle position series.

    ``vehicles`` maps vehicle_id -> iterable of (frame, x, y).
    """
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["Vehicle_ID", "Frame_ID", "Local_X", "Local_Y", "v_Class"])
        for vid, rows in sorted(vehicles.items()):
            for frame, x, y in rows:
                writer.writerow([vid, frame, repr(float(x)), repr(float(y)), 2])
    return path


def follower_rows(duration_s=60.0, gap_m=24.0, speed_mps=10.0, dt_s=0.1, x0=5.0, y=3.0):
    """Two-vehicle car-following corpus: leader ``gap_m`` ahead, equal speeds."""
    n = int(round(duration_s / dt_s)) + 1
    follower = [(f, x0 + speed_mps * f * dt_s, y) for f in range(n)]
    leader = [(f, x0 + gap_m + speed_mps * f * dt_s, y) for f in range(n)]
    return {1: follower, 2: leader}


@pytest.fixture
def follower_csv(tmp_path):
    return write_trajectory_csv(tmp_path / "follower.csv", follower_rows())


def quadrature_overlap_1d(mu1, sigma1, mu2, sigma2, step=1e-3, half_width_sigmas=12.0):
    """Trapezoid quadrature of the product of two 1D Gaussian densities."""
    span = half_width_sigmas * max(sigma1, sigma2)
    lo = min(mu1, mu2) - span
    hi = max(mu1, mu2) + span
    x = np.arange(lo, hi + step, step)
    f1 = np.exp(-((x - mu1) ** 2) / (2 * sigma1**2)) / (sigma1 * math.sqrt(2 * math.pi))
    f2 = np.exp(-((x - mu2) ** 2) / (2 * sigma2**2)) / (sigma2 * math.sqrt(2 * math.pi))
    y = f1 * f2
    return float((y.sum() - 0.5 * (y[0] + y[-1])) * step)


def _density_2d(X, Y, mu, cov):
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    dx = X - mu[0]
    dy = Y - mu[1]
    quad = (cov[1, 1] * dx * dx - 2 * cov[0, 1] * dx * dy + cov[0, 0] * dy * dy) / det
    return np.exp(-quad / 2) / (2 * math.pi * math.sqrt(det))


def quadrature_overlap_2d(mu1, cov1, mu2, cov2, half_width_sigmas=9.0, step_frac=0.125):
    """Trapezoid grid quadrature of the product of two bivariate densities.

    The grid spans both means plus ``half_width_sigmas`` of the largest
    standard deviation, with a step of ``step_frac`` of the smallest one; for
    these smooth, fast-decaying integrands the truncation error dominates
    and is negligible at nine standard deviations.
    """
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    eigs = np.concatenate((np.linalg.eigvalsh(cov1), np.linalg.eigvalsh(cov2)))
    span = half_width_sigmas * math.sqrt(eigs.max())
    h = step_frac * math.sqrt(eigs.min())
    lo = np.minimum(mu1, mu2) - span
    hi = np.maximum(mu1, mu2) + span
    x = np.arange(lo[0], hi[0] + h, h)
    y = np.arange(lo[1], hi[1] + h, h)
    X, Y = np.meshgrid(x, y, indexing="ij")
    f = _density_2d(X, Y, mu1, cov1) * _density_2d(X, Y, mu2, cov2)
    wx = np.ones_like(x)
    wx[0] = wx[-1] = 0.5
    wy = np.ones_like(y)
    wy[0] = wy[-1] = 0.5
    return float(np.einsum("i,ij,j->", wx, f, wy)) * h * h


def mixture_quadrature_2d(f1, f2, cross_section_m2, half_width_sigmas=9.0, step=0.02):
    """Grid quadrature of A_c * integral(f1_mixture * f2_mixture) dA.

    Independent of the pairwise-overlap decomposition: both mixture
    densities are evaluated pointwise on a shared grid covering every
    component, then the product is integrated with the trapezoid rule.
    """
    means = np.vstack((f1.means, f2.means))
    eigs = np.concatenate(
        [np.linalg.eigvalsh(c) for c in f1.covs] + [np.linalg.eigvalsh(c) for c in f2.covs]
    )
    span = half_width_sigmas * math.sqrt(eigs.max())
    lo = means.min(axis=0) - span
    hi = means.max(axis=0) + span
    x = np.arange(lo[0], hi[0] + step, step)
    y = np.arange(lo[1], hi[1] + step, step)
    X, Y = np.meshgrid(x, y, indexing="ij")

    def mixture_density(footprint):
        total = np.zeros_like(X)
        for w, m, c in zip(footprint.weights, footprint.means, footprint.covs):
            total += w * _density_2d(X, Y, m, c)
        return total

    f = mixture_density(f1) * mixture_density(f2)
    wx = np.ones_like(x)
    wx[0] = wx[-1] = 0.5
    wy = np.ones_like(y)
    wy[0] = wy[-1] = 0.5
    return cross_section_m2 * float(np.einsum("i,ij,j->", wx, f, wy)) * step * step
