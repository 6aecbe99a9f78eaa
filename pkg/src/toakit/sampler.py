"""Monte-Carlo realization of the stylized detector protocol.

A continuous observable A_t with CDF F_t can be sampled as F_t^{-1}(xi)
with xi uniform on [0, 1]; applying F_t to the samples must return a
uniform batch.  These inverse-transform draws validate the arrival-time
construction empirically: binning detector hits at a fixed value a over a
sweep of times and differencing the empirical CDF reconstructs |dF/dt|.

Randomness comes from numpy's PCG64 via default_rng(seed); per-time shards
derive their streams from SeedSequence.spawn so merged results do not
depend on shard layout.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateScenarioError, DomainError
from .toa_core import ToaDistribution


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seed: int
    count: int
    rejected: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.count != self.values.size:
            raise ValueError("count must equal len(values)")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value"])
            for v in self.values:
                writer.writerow([repr(float(v))])


def tabulate_cdf(field_, t, *, tol=1e-6, start_points=1025, max_points=2**20):
    """(a_grid, F_grid) for F_t on an adaptively refined grid.

    The grid doubles until the interpolated inverse moves by less than
    ``tol`` (in a-units) between refinements.
    """
    lo, hi = field_.domain_at(t)
    n = start_points
    prev_inverse = None
    probes = np.linspace(0.005, 0.995, 199)
    while True:
        a = np.linspace(lo, hi, n)
        rho = np.asarray(field_.rho(t, a), dtype=float)
        if np.any(rho < 0):
            raise DomainError("density evaluator returned negative values")
        cdf = np.concatenate([[0.0], np.cumsum((rho[1:] + rho[:-1]) * 0.5
                                               * np.diff(a))])
        total = cdf[-1]
        if total <= 0:
            raise DomainError("density integrates to zero on the domain")
        cdf /= total
        inverse = _generalized_inverse(cdf, a, probes)
        if prev_inverse is not None and np.max(np.abs(inverse - prev_inverse)) < tol:
            return a, cdf
        if n >= max_points:
            return a, cdf
        prev_inverse = inverse
        n = 2 * (n - 1) + 1


def _generalized_inverse(cdf, a, u):
    """inf{a : F(a) >= u}: searchsorted picks the first grid point at or
    above each level, the flat-region (generalized inverse) convention."""
    idx = np.searchsorted(cdf, u, side="left")
    idx = np.clip(idx, 1, cdf.size - 1)
    c0, c1 = cdf[idx - 1], cdf[idx]
    a0, a1 = a[idx - 1], a[idx]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(c1 > c0, (u - c0) / (c1 - c0), 0.0)
    return a0 + frac * (a1 - a0)


def sample_observable(field_, t, n, seed, *, cdf_tol=1e-6):
    """n inverse-CDF draws of the observable at time t."""
    a, cdf = tabulate_cdf(field_, t, tol=cdf_tol)
    rng = np.random.default_rng(seed)
    xi = rng.uniform(0.0, 1.0, int(n))
    values = _generalized_inverse(cdf, a, xi)
    return SampleBatch(values=values, seed=seed, count=int(n))


def apply_cdf(field_, t, batch, *, cdf_tol=1e-6):
    """F_t evaluated on a batch: uniform on [0,1] when the batch follows rho_t."""
    a, cdf = tabulate_cdf(field_, t, tol=cdf_tol)
    return np.interp(batch.values, a, cdf)


def sample_gaussian_toa(params, p, n, seed):
    """Arrival-time draws for the free-fall momentum scenario.

    T = (v - v0 - xi sigma_v)/g with xi standard normal and
    sigma_v = hbar/(2 m sigma); draws with T < 0 are rejected (the Bayes
    conditioning on a detection) and counted in ``rejected``.
    """
    if params.g <= 0:
        raise DegenerateScenarioError("g = 0 has no momentum arrival time")
    v = p / params.mass
    sigma_v = params.hbar / (2.0 * params.mass * params.sigma)
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(int(n))
    t = (v - params.v0 - xi * sigma_v) / params.g
    keep = t >= 0.0
    return SampleBatch(values=t[keep], seed=seed, count=int(keep.sum()),
                       rejected=int(n - keep.sum()))


@dataclass(frozen=True)
class EmpiricalToa:
    """Protocol output: empirical arrival density with uncertainty columns."""

    distribution: ToaDistribution
    window_rate: np.ndarray      # detector-window hit rate / delta_a ~ rho_t(a)
    std_error: np.ndarray        # binomial standard error of the density
    delta_a: float
    trials_per_time: int

    def to_csv(self, path):
        dist = self.distribution
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "density", "normalized_density", "std_error"])
            norm = dist.normalization
            for t, d, se in zip(dist.time_grid, dist.density, self.std_error):
                t, d, se = float(t), float(d), float(se)
                norm_d = d / norm if norm else ""
                writer.writerow([repr(t), repr(d),
                                 repr(norm_d) if norm_d != "" else "",
                                 repr(se)])


def protocol_histogram(field_, a, time_grid, trials_per_time, seed, *,
                       delta_a=None):
    """Stylized detector sweep: sample A_t at each grid time, record window
    hits at a, and difference the empirical CDF across times.

    At each time the fraction of draws inside [a - delta_a/2, a + delta_a/2]
    estimates the Born density at a, and the fraction at or below a gives
    the empirical F_t(a); |dF/dt| by central differences across grid times
    is the arrival-time density estimate.  A detection window with no hit
    anywhere raises: the trial count cannot resolve the signal.
    """
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("need a strictly increasing grid of at least 3 times")
    n = int(trials_per_time)
    children = np.random.SeedSequence(seed).spawn(grid.size)

    f_hat = np.empty_like(grid)
    rate = np.empty_like(grid)
    widths = np.empty_like(grid)
    for i, t in enumerate(grid):
        rng = np.random.default_rng(children[i])
        a_tab, cdf_tab = tabulate_cdf(field_, t)
        xi = rng.uniform(0.0, 1.0, n)
        samples = _generalized_inverse(cdf_tab, a_tab, xi)
        if delta_a is None:
            width = float(np.std(samples)) / 50.0  # detector window default
        else:
            width = float(delta_a)
        widths[i] = width
        inside = np.abs(samples - a) <= 0.5 * width
        rate[i] = inside.sum() / (n * width)
        f_hat[i] = (samples <= a).sum() / n

    if np.all(rate == 0.0):
        raise DomainError(
            "no detector hit at any grid time: increase trials_per_time or "
            "the window width")

    density = np.empty_like(grid)
    density[1:-1] = np.abs(f_hat[2:] - f_hat[:-2]) / (grid[2:] - grid[:-2])
    density[0] = abs(f_hat[1] - f_hat[0]) / (grid[1] - grid[0])
    density[-1] = abs(f_hat[-1] - f_hat[-2]) / (grid[-1] - grid[-2])

    # binomial noise of F-hat propagated through the central difference
    var_f = f_hat * (1.0 - f_hat) / n
    std_error = np.empty_like(grid)
    std_error[1:-1] = np.sqrt(var_f[2:] + var_f[:-2]) / (grid[2:] - grid[:-2])
    std_error[0] = std_error[1]
    std_error[-1] = std_error[-2]

    dist = ToaDistribution(grid, density,
                           diagnostics={"trials_per_time": n,
                                        "delta_a_mean": float(widths.mean())})
    return EmpiricalToa(distribution=dist, window_rate=rate,
                        std_error=std_error, delta_a=float(widths.mean()),
                        trials_per_time=n)
