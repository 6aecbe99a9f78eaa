"""Closed-form arrival-time densities for Gaussian systems.

When the observable is Gaussian at every time, with mean mu(t) and spread
sigma(t), the arrival-time density at value a is

    pi_a(t) = (1/sqrt(2 pi)) exp(-(a-mu)^2 / (2 sigma^2))
              * |d/dt[(a - mu(t)) / sigma(t)]|

(the absolute value keeps the density non-negative on both monotonicity
branches).  The free-fall position and momentum scenarios specialize this:
the momentum arrival time at p is itself Gaussian with mean (p - m v0)/(m g)
and spread hbar/(2 m g sigma).

SI units throughout; the dimensionless frames live in the backflow module.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DegenerateScenarioError
from .toa_core import DensityField

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional inputs of a scenario: hbar, mass, gravity, packet shape."""

    hbar: float
    mass: float
    sigma: float
    g: float = 0.0
    x0: float = 0.0
    v0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        bad = []
        if not self.hbar > 0:
            bad.append(f"hbar must be > 0, got {self.hbar}")
        if not self.mass > 0:
            bad.append(f"mass must be > 0, got {self.mass}")
        if not self.sigma > 0:
            bad.append(f"sigma must be > 0, got {self.sigma}")
        if self.g < 0:
            bad.append(f"g must be >= 0, got {self.g}")
        if bad:
            raise ConfigError(bad)

    @property
    def sigma_p(self):
        """Momentum spread of the initial packet, hbar/(2 sigma)."""
        return self.hbar / (2.0 * self.sigma)


@dataclass(frozen=True)
class GaussianMoments:
    """mu(t), sigma(t) and their analytic time derivatives."""

    mu: Callable
    sigma: Callable
    dmu_dt: Callable
    dsigma_dt: Callable

    def validate(self, times, rel_tol=1e-8):
        """Check the analytic derivatives against central differences."""
        times = np.asarray(times, dtype=float)
        h = 1e-6 * max(1.0, float(np.max(np.abs(times))))
        for name, f, df in (("mu", self.mu, self.dmu_dt),
                            ("sigma", self.sigma, self.dsigma_dt)):
            fd = (np.asarray(f(times + h)) - np.asarray(f(times - h))) / (2 * h)
            an = np.asarray(df(times))
            scale = np.maximum(np.abs(an), 1e-12)
            worst = np.max(np.abs(fd - an) / scale)
            if worst > max(rel_tol, 1e3 * h * h):
                raise ValueError(
                    f"analytic d{name}/dt disagrees with finite differences "
                    f"(relative {worst:.2e})")
        if np.any(np.asarray(self.sigma(times)) <= 0):
            raise ValueError("sigma(t) must stay positive")
        return True


def gaussian_toa_density(moments, a, t):
    """Closed-form arrival-time density at value a (vectorized over t)."""
    t = np.asarray(t, dtype=float)
    mu = np.asarray(moments.mu(t), dtype=float)
    sig = np.asarray(moments.sigma(t), dtype=float)
    dmu = np.asarray(moments.dmu_dt(t), dtype=float)
    dsig = np.asarray(moments.dsigma_dt(t), dtype=float)
    z = (a - mu) / sig
    rate = np.abs((-dmu * sig - (a - mu) * dsig) / (sig * sig))
    out = np.exp(-0.5 * z * z) / _SQRT_2PI * rate
    return float(out) if out.ndim == 0 else out


def freefall_position_moments(params):
    """mu_X(t) = x0 + v0 t + g t^2 / 2 and the spreading width sigma_X(t)."""
    x0, v0, g = params.x0, params.v0, params.g
    sigma = params.sigma
    # spreading rate hbar / (2 m sigma^2), squared in the width formula
    k = params.hbar / (2.0 * params.mass * sigma * sigma)

    def mu(t):
        t = np.asarray(t, dtype=float)
        return x0 + v0 * t + 0.5 * g * t * t

    def dmu(t):
        t = np.asarray(t, dtype=float)
        return v0 + g * t

    def sig(t):
        t = np.asarray(t, dtype=float)
        return sigma * np.sqrt(1.0 + (k * t) ** 2)

    def dsig(t):
        t = np.asarray(t, dtype=float)
        return sigma * k * k * t / np.sqrt(1.0 + (k * t) ** 2)

    return GaussianMoments(mu, sig, dmu, dsig)


def freefall_momentum_moments(params):
    """mu_P(t) = m g t + m v0 (the classical momentum), constant sigma_p."""
    m, g, v0 = params.mass, params.g, params.v0
    sp = params.sigma_p

    def mu(t):
        t = np.asarray(t, dtype=float)
        return m * g * t + m * v0

    def dmu(t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, m * g)

    def sig(t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, sp)

    def dsig(t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t)

    return GaussianMoments(mu, sig, dmu, dsig)


def freefall_momentum_density(params, p, t):
    """Arrival-time density at momentum p: Gaussian in t.

    pi_p(t) = m g rho_t(p), a normal density with mean t_p = (p - m v0)/(m g)
    and spread tau = hbar/(2 m g sigma).
    """
    if params.g <= 0:
        raise DegenerateScenarioError(
            "g = 0: the classical momentum never changes, so the momentum "
            "arrival time is undefined")
    t = np.asarray(t, dtype=float)
    t_p = (p - params.mass * params.v0) / (params.mass * params.g)
    tau = params.hbar / (2.0 * params.mass * params.g * params.sigma)
    out = np.exp(-0.5 * ((t - t_p) / tau) ** 2) / (_SQRT_2PI * tau)
    return float(out) if out.ndim == 0 else out


def freefall_velocity_toa_stats(params, v):
    """(mean, std) of the time to reach velocity v in free fall.

    mean = (v - v0)/g coincides with the classical value; std =
    hbar/(2 m g sigma) is the velocity spread divided by g.
    """
    if params.g <= 0:
        raise DegenerateScenarioError(
            "g = 0: the velocity never changes, arrival stats undefined")
    mean = (v - params.v0) / params.g
    std = params.hbar / (2.0 * params.mass * params.g * params.sigma)
    return mean, std


def gaussian_density_field(moments, *, n_sigma=40.0, name=""):
    """DensityField whose rho(t, a) is the Gaussian of the given moments."""

    def rho(t, a):
        a = np.asarray(a, dtype=float)
        mu = float(moments.mu(t))
        sig = float(moments.sigma(t))
        out = np.exp(-0.5 * ((a - mu) / sig) ** 2) / (_SQRT_2PI * sig)
        return float(out) if out.ndim == 0 else out

    def domain(t):
        mu = float(moments.mu(t))
        sig = float(moments.sigma(t))
        return mu - n_sigma * sig, mu + n_sigma * sig

    return DensityField(rho=rho, a_domain=domain, name=name)
