"""Closed-form Gaussian arrival-time scenarios against oracles and pipeline."""

import math

import numpy as np
import pytest

from toakit.errors import ConfigError, DegenerateScenarioError
from toakit.gaussian_toa import (GaussianMoments, PhysicalParams,
                                 freefall_momentum_density,
                                 freefall_momentum_moments,
                                 freefall_position_moments,
                                 freefall_velocity_toa_stats,
                                 gaussian_density_field, gaussian_toa_density)
from toakit.toa_core import (ToaDistribution, moments as dist_moments,
                             normalize_distribution, toa_from_cdf)

SQRT_2PI = math.sqrt(2.0 * math.pi)


def gauss_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def test_params_validation_lists_all_violations():
    with pytest.raises(ConfigError) as exc:
        PhysicalParams(hbar=-1.0, mass=0.0, sigma=-2.0)
    assert len(exc.value.violations) == 3


def test_peak_of_unit_rate_gaussian():
    m = GaussianMoments(
        mu=lambda t: np.asarray(t, dtype=float),
        sigma=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        dmu_dt=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        dsigma_dt=lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    assert gaussian_toa_density(m, 0.0, 0.0) == pytest.approx(1.0 / SQRT_2PI,
                                                              rel=1e-12)


def test_constant_moments_give_zero_density():
    m = GaussianMoments(
        mu=lambda t: np.full_like(np.asarray(t, dtype=float), 2.0),
        sigma=lambda t: np.full_like(np.asarray(t, dtype=float), 0.5),
        dmu_dt=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        dsigma_dt=lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    ts = np.linspace(0.0, 5.0, 50)
    assert np.max(gaussian_toa_density(m, 1.0, ts)) == 0.0


def test_freefall_position_moments_initial_and_classical_limit():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.3, g=9.8, x0=1.5, v0=-0.2)
    m = freefall_position_moments(p)
    assert float(m.mu(0.0)) == pytest.approx(1.5)
    assert float(m.sigma(0.0)) == pytest.approx(0.3)
    m.validate(np.linspace(0.1, 3.0, 7))

    # huge sigma suppresses spreading: the classical limit of the width
    p_cl = PhysicalParams(hbar=1.0, mass=1.0, sigma=1e4)
    m_cl = freefall_position_moments(p_cl)
    assert float(m_cl.sigma(10.0)) == pytest.approx(1e4, rel=1e-12)

    p_free = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.3)
    m_free = freefall_position_moments(p_free)
    t = 2.0
    expect = 0.3 * math.sqrt(1.0 + t**2 * 1.0 / (4 * 1.0 * 0.3**4))
    assert float(m_free.sigma(t)) == pytest.approx(expect, rel=1e-12)
    assert float(m_free.mu(t)) == 0.0


def test_momentum_density_is_the_documented_gaussian():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    # t_p = 2, tau = 1 for p = 2
    assert freefall_momentum_density(p, 2.0, 2.0) == pytest.approx(
        1.0 / SQRT_2PI, rel=1e-12)
    ts = np.linspace(-6.0, 10.0, 9)
    expect = np.exp(-0.5 * (ts - 2.0) ** 2) / SQRT_2PI
    assert np.max(np.abs(freefall_momentum_density(p, 2.0, ts) - expect)) < 1e-14

    # peak value mg / sqrt(2 pi sigma_p^2)
    peak = p.mass * p.g / math.sqrt(2 * math.pi * p.sigma_p**2)
    assert freefall_momentum_density(p, 2.0, 2.0) == pytest.approx(peak, rel=1e-12)


def test_momentum_density_mass_on_positive_times():
    # full-line integral is 1; [0, inf) carries 1 - Phi(-t_p / tau)
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    ts = np.linspace(-30.0, 30.0, 400001)
    full = np.trapezoid(freefall_momentum_density(p, 2.0, ts), ts)
    assert full == pytest.approx(1.0, abs=1e-10)
    pos = np.linspace(0.0, 30.0, 200001)
    mass = np.trapezoid(freefall_momentum_density(p, 2.0, pos), pos)
    assert mass == pytest.approx(1.0 - gauss_cdf(-2.0), abs=1e-9)


def test_momentum_density_requires_gravity():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=0.0)
    with pytest.raises(DegenerateScenarioError):
        freefall_momentum_density(p, 2.0, 1.0)
    with pytest.raises(DegenerateScenarioError):
        freefall_velocity_toa_stats(p, 1.0)


def test_velocity_stats():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=9.8)
    mean, std = freefall_velocity_toa_stats(p, 9.8)
    assert mean == pytest.approx(1.0)
    p1 = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    assert freefall_velocity_toa_stats(p1, 1.0)[1] == pytest.approx(1.0)
    p2 = PhysicalParams(hbar=1.0, mass=1.0, sigma=1.0, g=1.0)
    assert freefall_velocity_toa_stats(p2, 1.0)[1] == pytest.approx(0.5)


def test_momentum_closed_form_equals_moment_engine():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0, v0=0.3)
    m = freefall_momentum_moments(p)
    ts = np.linspace(0.0, 6.0, 200)
    lhs = freefall_momentum_density(p, 2.0, ts)
    rhs = gaussian_toa_density(m, 2.0, ts)
    scale = np.maximum(np.abs(lhs), 1e-300)
    assert np.max(np.abs(lhs - rhs) / scale) < 1e-12


def test_closed_form_vs_cdf_pipeline():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    m = freefall_momentum_moments(p)
    field = gaussian_density_field(m)
    grid = np.linspace(0.5, 3.5, 25)
    dist = toa_from_cdf(field, 2.0, grid, rel_tol=1e-10)
    closed = gaussian_toa_density(m, 2.0, grid)
    peak = closed.max()
    sel = closed > 1e-10 * peak
    assert np.max(np.abs(dist.density[sel] - closed[sel]) / closed[sel]) < 1e-8


def test_momentum_toa_moments_via_distribution_engine():
    # narrow arrival spread so truncation at t=0 is negligible
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=5.0, g=1.0)
    tau = p.hbar / (2 * p.mass * p.g * p.sigma)
    t_p = 2.0
    fn = lambda t: freefall_momentum_density(p, 2.0, t)
    grid = np.linspace(max(t_p - 8 * tau, 0.0), t_p + 8 * tau, 400)
    dist = normalize_distribution(ToaDistribution(grid, fn(grid), density_fn=fn))
    mean, std = dist_moments(dist)
    assert mean == pytest.approx(t_p, rel=1e-6)
    assert std == pytest.approx(tau, rel=1e-6)


def test_position_toa_mean_exceeds_classical_value():
    # soft numerical property for one parameter set: quantum spreading makes
    # the mean free-fall arrival at a downstream position exceed the
    # classical sqrt(2x/g).  (For g = 0 the mean diverges; gravity's
    # quadratic drift restores integrable tails.)
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.4, g=9.8, x0=0.0, v0=0.0)
    m = freefall_position_moments(p)
    x_det = 1.0
    t_classical = math.sqrt(2.0 * x_det / p.g)
    fn = lambda t: gaussian_toa_density(m, x_det, t)
    grid = np.linspace(0.0, 10.0, 4001)
    dist = normalize_distribution(ToaDistribution(grid, fn(grid), density_fn=fn))
    mean, _ = dist_moments(dist)
    assert mean > t_classical
