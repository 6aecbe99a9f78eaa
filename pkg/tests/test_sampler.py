"""Statistical validation of the inverse-transform sampler.

The Kolmogorov-Smirnov threshold 1.63/sqrt(n) is the asymptotic two-sided
critical value at 1% significance; chi-square p-values come from
scipy.stats against the analytic bin masses.
"""

import math

import numpy as np
import pytest
from scipy import stats

from toakit.errors import DegenerateScenarioError, DomainError
from toakit.gaussian_toa import (PhysicalParams, freefall_momentum_density,
                                 freefall_momentum_moments,
                                 freefall_position_moments,
                                 gaussian_density_field, gaussian_toa_density)
from toakit.sampler import (SampleBatch, apply_cdf, protocol_histogram,
                            sample_gaussian_toa, sample_observable)

KS_CRIT_1PCT = 1.63  # asymptotic two-sided critical coefficient at 1%


def ks_statistic_against(values, cdf):
    values = np.sort(values)
    n = values.size
    theo = cdf(values)
    upper = np.max(np.arange(1, n + 1) / n - theo)
    lower = np.max(theo - np.arange(0, n) / n)
    return max(upper, lower)


def moving_gaussian_field():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    return p, gaussian_density_field(freefall_momentum_moments(p))


def test_determinism():
    _, field = moving_gaussian_field()
    b1 = sample_observable(field, 1.0, 5000, seed=77)
    b2 = sample_observable(field, 1.0, 5000, seed=77)
    assert np.array_equal(b1.values, b2.values)
    b3 = sample_observable(field, 1.0, 5000, seed=78)
    assert not np.array_equal(b1.values, b3.values)


def test_sample_mean_within_clt_band():
    p, field = moving_gaussian_field()
    t = 1.5
    n = 10**6
    batch = sample_observable(field, t, n, seed=1)
    mu = p.mass * p.g * t + p.mass * p.v0
    sigma = p.sigma_p
    assert abs(batch.values.mean() - mu) <= 4.0 * sigma / math.sqrt(n)


def test_near_delta_density_concentrates():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=500.0, g=1.0)  # tiny sigma_p
    field = gaussian_density_field(freefall_momentum_moments(p))
    t = 1.0
    batch = sample_observable(field, t, 20000, seed=2)
    mu = p.mass * p.g * t
    assert np.max(np.abs(batch.values - mu)) < 0.01


def test_ks_against_true_cdf():
    p, field = moving_gaussian_field()
    t = 1.0
    n = 10**6
    batch = sample_observable(field, t, n, seed=3)
    mu, sig = p.mass * p.g * t, p.sigma_p
    cdf = lambda x: 0.5 * (1.0 + np.vectorize(math.erf)((x - mu) / (sig * math.sqrt(2))))
    d = ks_statistic_against(batch.values, cdf)
    assert d < KS_CRIT_1PCT / math.sqrt(n)


def test_pushforward_uniformity():
    # xi = F_t(A_t) must be KS-uniform: the probability integral transform
    _, field = moving_gaussian_field()
    t = 1.0
    n = 10**6
    batch = sample_observable(field, t, n, seed=4)
    xi = apply_cdf(field, t, batch)
    d = ks_statistic_against(xi, lambda u: np.clip(u, 0.0, 1.0))
    assert d < KS_CRIT_1PCT / math.sqrt(n)


def test_gaussian_toa_deterministic_limit():
    p = PhysicalParams(hbar=1e-12, mass=1.0, sigma=1.0, g=1.0)  # sigma_v -> 0
    batch = sample_gaussian_toa(p, 2.0, 1000, seed=5)
    assert np.max(np.abs(batch.values - 2.0)) < 1e-9


def test_gaussian_toa_std_matches_formula():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=5.0, g=1.0)
    n = 10**6
    batch = sample_gaussian_toa(p, 2.0, n, seed=6)
    tau = p.hbar / (2 * p.mass * p.g * p.sigma)
    se = tau / math.sqrt(2 * (n - 1))  # std error of a Gaussian sample std
    assert abs(batch.values.std(ddof=1) - tau) <= 3.0 * se


def test_gaussian_toa_rejection_fraction_matches_analytic_mass():
    # retained fraction ~ mass of the unnormalized density on [0, inf)
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.4, g=1.0)
    n = 10**6
    batch = sample_gaussian_toa(p, 0.8, n, seed=7)
    ts = np.linspace(0.0, 30.0, 300001)
    mass = np.trapezoid(freefall_momentum_density(p, 0.8, ts), ts)
    frac = batch.count / n
    se = math.sqrt(mass * (1 - mass) / n)
    assert abs(frac - mass) <= 3.0 * se


def test_gaussian_toa_chi_square_against_density():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    n = 10**6
    batch = sample_gaussian_toa(p, 2.0, n, seed=8)
    lo, hi = 0.0, 6.0
    edges = np.linspace(lo, hi, 101)
    observed, _ = np.histogram(batch.values[(batch.values >= lo)
                                            & (batch.values < hi)], bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = edges[1] - edges[0]
    probs = freefall_momentum_density(p, 2.0, centers) * width
    # condition on the window and rescale to the observed count
    probs = probs / probs.sum()
    expected = probs * observed.sum()
    keep = expected >= 5.0
    chi2 = np.sum((observed[keep] - expected[keep]) ** 2 / expected[keep])
    pval = stats.chi2.sf(chi2, keep.sum() - 1)
    assert pval > 0.01


def test_gaussian_toa_requires_gravity():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=0.0)
    with pytest.raises(DegenerateScenarioError):
        sample_gaussian_toa(p, 1.0, 10, seed=0)


def test_batch_count_invariant():
    with pytest.raises(ValueError):
        SampleBatch(values=np.zeros(3), seed=0, count=5)


def test_protocol_histogram_matches_analytic_density():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    moments = freefall_momentum_moments(p)
    field = gaussian_density_field(moments)
    a = 2.0
    grid = np.linspace(0.25, 4.0, 16)
    emp = protocol_histogram(field, a, grid, trials_per_time=10**5, seed=9)
    analytic = gaussian_toa_density(moments, a, grid)
    peak = analytic.max()
    inner = slice(1, -1)  # endpoints use one-sided differences
    sup = np.max(np.abs(emp.distribution.density[inner] - analytic[inner]))
    assert sup < 0.05 * peak
    # window rate estimates the Born density rho_t(a)
    rho = np.exp(-0.5 * ((a - p.mass * p.g * grid) / p.sigma_p) ** 2) \
        / (math.sqrt(2 * math.pi) * p.sigma_p)
    assert np.max(np.abs(emp.window_rate - rho)) < 0.1 * rho.max()


def test_protocol_histogram_time_independent_field():
    static = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=0.0, v0=3.0)
    field = gaussian_density_field(freefall_momentum_moments(static))
    grid = np.linspace(0.5, 2.0, 9)
    emp = protocol_histogram(field, 3.0, grid, trials_per_time=10**5, seed=10)
    consistent = np.abs(emp.distribution.density) <= 3.0 * emp.std_error + 1e-12
    assert consistent.all()


def test_protocol_histogram_window_halving_stable():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    field = gaussian_density_field(freefall_momentum_moments(p))
    grid = np.linspace(0.25, 4.0, 16)
    e1 = protocol_histogram(field, 2.0, grid, trials_per_time=10**5, seed=11,
                            delta_a=0.02)
    e2 = protocol_histogram(field, 2.0, grid, trials_per_time=10**5, seed=11,
                            delta_a=0.01)
    # the CDF-difference estimate does not depend on the window width
    diff = np.abs(e1.distribution.density - e2.distribution.density)
    noise = 3.0 * (e1.std_error + e2.std_error)
    assert np.all(diff <= noise + 1e-12)


def test_protocol_histogram_insufficient_trials():
    p = PhysicalParams(hbar=1.0, mass=1.0, sigma=0.5, g=1.0)
    field = gaussian_density_field(freefall_momentum_moments(p))
    grid = np.linspace(0.25, 1.0, 4)
    with pytest.raises(DomainError):
        # detector parked far outside the support never fires
        protocol_histogram(field, 80.0, grid, trials_per_time=50, seed=12)
