"""The universal arrival-time transformation.

Any time-dependent density rho_t(a) (or probability current j_t(x)) at a
fixed detection value becomes a raw arrival-time density |dF_t(a)/dt|
(equivalently |j_t(x)| where a current exists), with optional Bayes
normalization over [0, inf), moments, and the zero structure that signals
current reversals.

Normalization is opt-in: whether the raw density or its conditional
(detection-given) version is wanted is a modelling choice, so both the raw
values and the normalization constant are kept.
"""

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import quadrature
from .errors import (BudgetExceededError, CannotNormalizeError,
                     DensityInvalidError, DivergentMomentError,
                     TailEstimateError)
from .quadrature import RootResult

_CDF_SLACK = 1e-6


@dataclass(frozen=True)
class DensityField:
    """Time-dependent Born density rho(t, a), optionally with a current j(t, x).

    ``rho`` is probability per unit a and must be vectorized over its second
    argument; ``a_domain`` (static pair or callable t -> pair) must cover
    essentially all mass at every queried time.
    """

    rho: Optional[Callable] = None
    current: Optional[Callable] = None
    a_domain: object = None
    name: str = ""

    def domain_at(self, t):
        if callable(self.a_domain):
            return self.a_domain(t)
        return self.a_domain

    def cdf(self, t, a, rel_tol=1e-11):
        """F_t(a), by adaptive quadrature of rho(t, .) from the lower edge."""
        if self.rho is None:
            raise DensityInvalidError("field provides no density evaluator")
        lo, hi = self.domain_at(t)
        if a <= lo:
            return 0.0
        upper = min(a, hi)
        res = quadrature.integrate_finite(lambda u: self.rho(t, u), lo, upper,
                                          rel_tol=rel_tol, abs_tol=1e-14)
        return res.value

    def check_normalized(self, times, tol=_CDF_SLACK):
        """Verify integral of rho(t, .) over the domain is 1 at the given times."""
        for t in times:
            lo, hi = self.domain_at(t)
            mass = self.cdf(t, hi)
            if abs(mass - 1.0) > tol:
                raise DensityInvalidError(
                    f"density mass at t={t} is {mass}, not 1 within {tol}")


@dataclass(frozen=True)
class ToaDistribution:
    """Arrival-time density on a time grid.

    ``density`` holds the raw |dF/dt| (or |j|) values unless ``normalized``
    is set, in which case it was divided by ``normalization`` (the raw mass
    on [0, inf)).  ``zeros`` records located zeros with their sign-change /
    tangential classification.  ``density_fn`` optionally keeps the
    continuous raw evaluator for exact normalization and moments.
    """

    time_grid: np.ndarray
    density: np.ndarray
    normalization: Optional[float] = None
    zeros: tuple = ()
    normalized: bool = False
    density_fn: Optional[Callable] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        object.__setattr__(self, "time_grid", grid)
        object.__setattr__(self, "density", dens)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("time grid must be strictly increasing, length >= 2")
        if np.any(grid < 0):
            raise ValueError("arrival times are conditioned on t >= 0")
        if dens.shape != grid.shape:
            raise ValueError("density and grid shapes differ")
        if np.any(dens < 0) or not np.all(np.isfinite(dens)):
            raise ValueError("density values must be finite and >= 0")
        for z in self.zeros:
            if not (grid[0] <= z.location <= grid[-1]):
                raise ValueError(f"zero at {z.location} outside the grid span")

    def grid_mass(self):
        """Trapezoid integral of the density over the grid."""
        return float(np.trapezoid(self.density, self.time_grid))

    def to_csv(self, path):
        norm = self.normalization
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "density", "normalized_density"])
            for t, d in zip(self.time_grid, self.density):
                t, d = float(t), float(d)
                if self.normalized:
                    writer.writerow([repr(t), repr(d * norm), repr(d)])
                elif norm:
                    writer.writerow([repr(t), repr(d), repr(d / norm)])
                else:
                    writer.writerow([repr(t), repr(d), ""])

    def to_json_dict(self):
        return {
            "time_grid": [float(t) for t in self.time_grid],
            "density": [float(d) for d in self.density],
            "normalization": self.normalization,
            "normalized": self.normalized,
            "zeros": [{"location": z.location,
                       "bracket_width": z.bracket_width,
                       "classification": z.classification} for z in self.zeros],
            "diagnostics": {k: v for k, v in self.diagnostics.items()},
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)


def _locate_grid_zeros(grid, values, fn, tol=1e-12):
    """Refine every sign change of `values` along the grid via find_zero."""
    zeros = []
    sign = np.sign(values)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in idx:
        root = quadrature.find_zero(fn, (grid[i], grid[i + 1]),
                                    tol=tol * max(grid[i + 1], 1.0))
        zeros.append(root)
    return tuple(zeros)


def toa_from_cdf(field, a, time_grid, *, rel_tol=1e-9, h0=None,
                 normalize=False, cdf_rel_tol=1e-11):
    """Arrival-time density |dF_t(a)/dt| on the grid, from the density route.

    The CDF F_t(a) comes from adaptive quadrature of rho; the time derivative
    from Richardson-extrapolated central differences.  The transformation
    uses |dF/dt| directly: branches of a non-monotone F share the same
    inverse, so no branch solving is needed.
    """
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or np.any(grid < 0):
        raise ValueError("time grid must be strictly increasing with t >= 0")

    check_ts = [grid[0], grid[grid.size // 2], grid[-1]]
    field.check_normalized(check_ts)

    def F(t):
        val = field.cdf(t, a, rel_tol=cdf_rel_tol)
        if not (-_CDF_SLACK <= val <= 1.0 + _CDF_SLACK):
            raise DensityInvalidError(f"CDF value {val} at t={t} outside [0,1]")
        return val

    spacing = np.min(np.diff(grid))
    density = np.empty_like(grid)
    flagged = []
    for i, t in enumerate(grid):
        h = h0 if h0 is not None else max(spacing, 1e-3 * max(t, grid[-1] * 1e-3))
        res = quadrature.differentiate_time(F, t, h, rel_tol=rel_tol, t_min=0.0
                                            if t > 0 else None)
        density[i] = abs(res.value)
        if not res.converged:
            flagged.append(float(t))

    diagnostics = {"non_smooth_times": flagged} if flagged else {}
    dist = ToaDistribution(grid, density, diagnostics=diagnostics)
    return normalize_distribution(dist) if normalize else dist


def toa_from_current(field, x, time_grid, *, normalize=False, zero_tol=1e-12):
    """Arrival-time density |j_t(x)| on the grid, from the current route.

    Valid when the current vanishes toward the lower edge of the domain (the
    continuity equation then gives dF_t(x)/dt = -j_t(x)).  Grid sign changes
    of j are refined into classified zeros.
    """
    if field.current is None:
        raise DensityInvalidError("field provides no current evaluator")
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or np.any(grid < 0):
        raise ValueError("time grid must be strictly increasing with t >= 0")

    j_fn = lambda t: field.current(t, x)
    try:
        j_vals = np.asarray(field.current(grid, x), dtype=float)
        if j_vals.shape != grid.shape:
            raise ValueError
    except (TypeError, ValueError):
        j_vals = np.array([float(field.current(t, x)) for t in grid])
    zeros = _locate_grid_zeros(grid, j_vals, j_fn, tol=zero_tol)
    dist = ToaDistribution(grid, np.abs(j_vals), zeros=zeros,
                           density_fn=lambda t: np.abs(j_fn(t)))
    return normalize_distribution(dist) if normalize else dist


def raw_mass(dist, *, rel_tol=1e-8):
    """Total raw mass on [0, inf): the Bayes normalization constant."""
    if dist.normalized:
        return dist.normalization
    breaks = [z.location for z in dist.zeros]
    if dist.density_fn is not None:
        start = 0.0 if dist.time_grid[0] <= 1e-12 else float(dist.time_grid[0])
        span = max(float(dist.time_grid[-1] - start), 1.0)
        res = quadrature.integrate_semi_infinite(
            dist.density_fn, start, rel_tol=rel_tol,
            break_points=breaks, initial_span=span)
        mass = res.value
        if start > 0:
            head = quadrature.integrate_finite(dist.density_fn, start * 1e-3,
                                               start, rel_tol=rel_tol,
                                               break_points=breaks).value
            mass += head + float(dist.density_fn(start * 1e-3)) * start * 1e-3
        return float(mass)
    # grid trapezoid plus an exponential tail estimate from the last decade;
    # a flat or growing end gives no trustworthy estimate, so only a clearly
    # decaying tail whose implied mass stays small is added
    mass = dist.grid_mass()
    grid, dens = dist.time_grid, dist.density
    span = grid[-1] - grid[0]
    sel = grid >= grid[-1] - 0.1 * span
    tail_t, tail_d = grid[sel], dens[sel]
    pos = tail_d > 0
    if pos.sum() >= 3 and dens[-1] > 1e-12 * dens.max():
        slope = np.polyfit(tail_t[pos], np.log(tail_d[pos]), 1)[0]
        if slope * span < -1e-3:
            tail = dens[-1] / (-slope)
            if tail < 0.5 * abs(mass):
                mass += tail
    return float(mass)


def normalize_distribution(dist, *, rel_tol=1e-8):
    """Bayes-normalized version: density / (raw mass on [0, inf)).

    The result is the conditional arrival-time distribution given that a
    detection occurs.  Idempotent on already-normalized input.
    """
    if dist.normalized:
        return dist
    mass = raw_mass(dist, rel_tol=rel_tol)
    if not math.isfinite(mass) or mass <= 0:
        raise CannotNormalizeError(
            f"raw density mass {mass}; the state never arrives at this value")
    fn = dist.density_fn
    norm_fn = (lambda t: fn(t) / mass) if fn is not None else None
    return replace(dist, density=dist.density / mass, normalization=float(mass),
                   normalized=True, density_fn=norm_fn)


def moments(dist, *, rel_tol=1e-9):
    """(mean, std) of a normalized arrival-time distribution.

    Uses the continuous evaluator when available, otherwise grid quadrature
    with an exponential tail estimate; a non-decaying second-moment tail
    raises instead of returning a number.
    """
    if not dist.normalized:
        raise ValueError("moments require a normalized distribution")
    breaks = [z.location for z in dist.zeros]
    if dist.density_fn is not None:
        fn = dist.density_fn
        try:
            m1 = quadrature.integrate_semi_infinite(
                lambda t: t * fn(t), 0.0, rel_tol=rel_tol, break_points=breaks,
                initial_span=float(dist.time_grid[-1])).value
            m2 = quadrature.integrate_semi_infinite(
                lambda t: t * t * fn(t), 0.0, rel_tol=rel_tol,
                break_points=breaks,
                initial_span=float(dist.time_grid[-1])).value
        except TailEstimateError as exc:
            raise DivergentMomentError(str(exc)) from exc
        except BudgetExceededError as exc:
            raise DivergentMomentError(
                f"moment integral exhausted its budget ({exc}); the tail is "
                "likely too heavy for a finite moment") from exc
    else:
        grid, dens = dist.time_grid, dist.density
        if dens[-1] > 1e-9 * dens.max():
            span = grid[-1] - grid[0]
            sel = grid >= grid[-1] - 0.1 * span
            pos = dens[sel] > 0
            slope = np.polyfit(grid[sel][pos], np.log(dens[sel][pos]), 1)[0] \
                if pos.sum() >= 3 else 0.0
            if slope >= 0:
                raise DivergentMomentError(
                    "tail estimate not decreasing; moment integrals untrusted")
            # exponential tail moments: int_T^inf t^k c e^{s(t-T)} dt, s<0
            T, c, s = grid[-1], dens[-1], slope
            tail1 = c * (T / -s + 1.0 / s ** 2)
            tail2 = c * (T * T / -s + 2 * T / s ** 2 + 2.0 / -s ** 3)
        else:
            tail1 = tail2 = 0.0
        m1 = float(np.trapezoid(grid * dens, grid)) + tail1
        m2 = float(np.trapezoid(grid * grid * dens, grid)) + tail2
    var = m2 - m1 * m1
    if var < 0:
        var = 0.0
    return float(m1), float(math.sqrt(var))
