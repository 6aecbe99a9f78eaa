"""Adaptive integration, numerical differentiation, and bracketing roots.

Evaluators are called with numpy arrays of abscissae whenever possible (one
call per refinement wave), falling back to per-point calls for scalar-only
callables.  All routines are deterministic for fixed tolerances; evaluators
must be pure.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import BudgetExceededError, NoZeroError, TailEstimateError

_GL_LO_N = 10
_GL_HI_N = 21
_X_LO, _W_LO = leggauss(_GL_LO_N)
_X_HI, _W_HI = leggauss(_GL_HI_N)


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        assert self.abs_error_estimate >= 0
        assert self.evaluations >= 1


@dataclass(frozen=True)
class RootResult:
    location: float
    bracket_width: float
    classification: str  # "sign_change" | "tangential_zero"


@dataclass(frozen=True)
class DerivativeResult:
    value: float
    abs_error_estimate: float
    converged: bool
    step: float


def _eval(f, xs):
    """Evaluate f on an array, tolerating scalar-only callables."""
    try:
        out = np.asarray(f(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(x)) for x in xs], dtype=float)


def _panel_nodes(lo, hi):
    """Abscissae for one wave: low and high rule nodes for each panel."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs_lo = mid[:, None] + half[:, None] * _X_LO[None, :]
    xs_hi = mid[:, None] + half[:, None] * _X_HI[None, :]
    return np.concatenate([xs_lo.ravel(), xs_hi.ravel()])


def _panel_estimates(lo, hi, vals):
    n = lo.size
    half = 0.5 * (hi - lo)
    v_lo = vals[: n * _GL_LO_N].reshape(n, _GL_LO_N)
    v_hi = vals[n * _GL_LO_N:].reshape(n, _GL_HI_N)
    i_lo = half * (v_lo * _W_LO).sum(axis=1)
    i_hi = half * (v_hi * _W_HI).sum(axis=1)
    err = np.abs(i_hi - i_lo)
    return i_hi, err


def integrate_finite(f, a, b, rel_tol=1e-10, abs_tol=1e-12, *,
                     break_points=(), max_evals=2_000_000, initial_panels=8):
    """Globally adaptive integral of f over [a, b].

    The interval is first split at ``break_points`` (e.g. kinks of |j| found
    by a sign scan); each piece starts with ``initial_panels`` panels and the
    worst panels are bisected, a wave at a time, until the summed error
    estimate passes max(abs_tol, rel_tol*|value|).
    """
    if not (a < b):
        raise ValueError(f"integration bounds must satisfy a < b, got [{a}, {b}]")
    if rel_tol <= 0 or abs_tol < 0:
        raise ValueError("tolerances must be positive")

    edges = [a] + sorted(p for p in break_points if a < p < b) + [b]
    edges = np.unique(np.asarray(edges, dtype=float))
    lo_list, hi_list = [], []
    for x0, x1 in zip(edges[:-1], edges[1:]):
        pts = np.linspace(x0, x1, initial_panels + 1)
        lo_list.append(pts[:-1])
        hi_list.append(pts[1:])
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)

    evals = 0
    vals = _eval(f, _panel_nodes(lo, hi))
    evals += vals.size
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand returned a non-finite value")
    ivals, errs = _panel_estimates(lo, hi, vals)

    while True:
        total = ivals.sum()
        tol = max(abs_tol, rel_tol * abs(total))
        if errs.sum() <= tol:
            return IntegrationResult(float(total), float(errs.sum()), evals)
        if evals >= max_evals:
            raise BudgetExceededError(
                f"integration budget exceeded ({evals} evaluations)",
                best_estimate=float(total), abs_error=float(errs.sum()))
        # refine every panel holding more than its share of the error budget
        share = tol / (2.0 * errs.size)
        split = errs > max(share, 1e-300)
        if not split.any():
            split = errs == errs.max()
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[~split], lo[split], mid])
        new_hi = np.concatenate([hi[~split], mid, hi[split]])
        pend_lo = np.concatenate([lo[split], mid])
        pend_hi = np.concatenate([mid, hi[split]])
        vals = _eval(f, _panel_nodes(pend_lo, pend_hi))
        evals += vals.size
        if not np.all(np.isfinite(vals)):
            raise ValueError("integrand returned a non-finite value")
        new_i, new_e = _panel_estimates(pend_lo, pend_hi, vals)
        ivals = np.concatenate([ivals[~split], new_i])
        errs = np.concatenate([errs[~split], new_e])
        lo, hi = new_lo, new_hi


def integrate_semi_infinite(f, a, rel_tol=1e-8, *, abs_tol=0.0,
                            break_points=(), initial_span=1.0,
                            max_doublings=64, max_evals=4_000_000):
    """Integral of f over [a, inf) for integrands with eventually monotone decay.

    Adaptive truncation: the upper limit doubles until a doubling changes the
    running value by less than rel_tol/10, and the geometric tail estimate of
    the remaining mass is below the same threshold.  Raises TailEstimateError
    when no decay is detected.
    """
    span = initial_span
    upper = a + span
    seg_tol = rel_tol / 10.0
    res = integrate_finite(f, a, upper, rel_tol=seg_tol, abs_tol=abs_tol or 1e-300,
                           break_points=break_points, max_evals=max_evals)
    total, err, evals = res.value, res.abs_error_estimate, res.evaluations
    prev_seg = abs(res.value)
    growth_strikes = 0
    for _ in range(max_doublings):
        seg = integrate_finite(f, upper, 2.0 * upper, rel_tol=seg_tol,
                               abs_tol=max(abs_tol, 1e-16 * abs(total)) or 1e-300,
                               break_points=break_points, max_evals=max_evals)
        total += seg.value
        err += seg.abs_error_estimate
        evals += seg.evaluations
        upper *= 2.0
        seg_mag = abs(seg.value)
        if prev_seg > 0 and seg_mag > prev_seg:
            growth_strikes += 1
            if growth_strikes >= 3:
                raise TailEstimateError(
                    "no decay detected: successive doublings keep growing")
        else:
            growth_strikes = 0
        if seg_mag <= seg_tol * abs(total) / 2.0 or (seg_mag == 0 and prev_seg == 0):
            # geometric tail bound: remaining mass ~ seg * r / (1 - r)
            r = seg_mag / prev_seg if prev_seg > 0 else 0.0
            tail = seg_mag * r / (1.0 - r) if r < 1.0 else seg_mag
            if tail <= seg_tol * abs(total) or abs(total) == 0:
                return IntegrationResult(float(total), float(err + tail), evals)
        prev_seg = seg_mag
    raise TailEstimateError(
        f"semi-infinite integral not converged after {max_doublings} doublings")


def differentiate_time(F, t, h0, *, rel_tol=1e-8, h_min=1e-13, max_levels=12,
                       t_min=None):
    """Central-difference derivative dF/dt with Richardson extrapolation.

    The step halves until successive diagonal estimates agree to ``rel_tol``
    relative (error O(h^4) of the final step at the first extrapolation
    level).  A non-smooth point, where the estimates diverge as h shrinks,
    is reported with converged=False rather than raised.
    """
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    if t_min is not None:
        gap = t - t_min
        if gap <= 0:
            raise ValueError(f"t={t} not above domain floor {t_min}")
        h0 = min(h0, 0.5 * gap)

    table = []
    best = None
    best_err = math.inf
    prev_diag = None
    worsened = 0
    h = h0
    for k in range(max_levels):
        d0 = (F(t + h) - F(t - h)) / (2.0 * h)
        row = [d0]
        if table:
            prev = table[-1]
            for j in range(1, len(prev) + 1):
                fac = 4.0 ** j
                row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (fac - 1.0))
        table.append(row)
        diag = row[-1]
        if prev_diag is not None:
            err = abs(diag - prev_diag)
            if err < best_err:
                best, best_err = diag, err
                worsened = 0
            else:
                worsened += 1
            scale = max(abs(diag), abs(prev_diag))
            if err <= rel_tol * scale or (scale == 0.0 and err == 0.0):
                return DerivativeResult(float(diag), float(err), True, h)
            if worsened >= 2 and k >= 3:
                # estimates diverging: rounding floor or a non-smooth point
                return DerivativeResult(float(best), float(best_err), False, h)
        prev_diag = diag
        h *= 0.5
        if h < h_min:
            break
    converged = best_err <= rel_tol * max(abs(best or 0.0), 1e-300)
    return DerivativeResult(float(best if best is not None else prev_diag),
                            float(best_err), bool(converged), h)


def _brent(f, a, b, fa, fb, tol):
    """Brent's method on a sign-change bracket; returns (root, width)."""
    eps = np.finfo(float).eps
    c, fc = a, fa
    e = d = b - a
    while True:
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        t = 2.0 * eps * abs(b) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= t or fb == 0.0:
            return b, max(abs(m) * 2.0, tol * 1e-6)
        if abs(e) < t or abs(fa) <= abs(fb):
            e = d = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(t * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                e = d = m
        a, fa = b, fb
        if abs(d) > t:
            b += d
        elif m > 0:
            b += t
        else:
            b -= t
        fb = f(b)
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            e = d = b - a


def _golden_min(g, a, b, tol):
    """Golden-section minimum of g on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    g1, g2 = g(x1), g(x2)
    while b - a > tol:
        if g1 < g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - invphi * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + invphi * (b - a)
            g2 = g(x2)
    x = 0.5 * (a + b)
    return x, g(x)


def find_zero(f, bracket, tol=1e-12, *, zero_threshold=None, scan_points=257):
    """Locate a zero of f in the bracket.

    A sign change at (or inside, found by a coarse scan) the bracket gives a
    sign_change root via Brent's method.  Without any sign change, an
    interior minimum of |f| descending below the zero threshold (default
    1e-10 x the scanned max of |f|) is classified as a tangential_zero;
    the distinction matters because a vanishing arrival-time density only
    certifies a current reversal in the sign_change case.
    """
    t_lo, t_hi = bracket
    if not (t_lo < t_hi):
        raise ValueError("bracket must satisfy t_lo < t_hi")
    xs = np.linspace(t_lo, t_hi, scan_points)
    vals = _eval(f, xs)
    if not np.all(np.isfinite(vals)):
        raise ValueError("f returned a non-finite value on the bracket")
    fmax = np.max(np.abs(vals))
    if zero_threshold is None:
        zero_threshold = 1e-10 * fmax

    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if idx.size:
        i = idx[0]
        root, width = _brent(lambda x: float(f(x)), xs[i], xs[i + 1],
                             vals[i], vals[i + 1], tol)
        return RootResult(float(root), float(max(width, tol)), "sign_change")
    exact = np.nonzero(vals == 0.0)[0]
    if exact.size:
        return RootResult(float(xs[exact[0]]), float(tol), "sign_change"
                          if 0 < exact[0] < scan_points - 1
                          and sign[exact[0] - 1] * sign[exact[0] + 1] < 0
                          else "tangential_zero")

    # no sign change: look for a tangential zero at the |f| minimum
    imin = int(np.argmin(np.abs(vals)))
    a = xs[max(imin - 1, 0)]
    b = xs[min(imin + 1, scan_points - 1)]
    x, gmin = _golden_min(lambda x: abs(float(f(x))), a, b, tol)
    if gmin <= zero_threshold:
        return RootResult(float(x), float(max(b - a, tol)), "tangential_zero")
    raise NoZeroError(
        f"no zero in [{t_lo}, {t_hi}]: min |f| = {gmin:.3e} above threshold "
        f"{zero_threshold:.3e}")


def scan_sign_changes(f, a, b, *, points_per_decade=2048, log_spaced=True,
                      min_points=1024):
    """Coarse sign scan of f on [a, b]; returns refined sign-change roots.

    Used to split |f| integrals at their kinks: adaptive panels converge
    slowly across the non-smooth points where f changes sign.
    """
    if log_spaced and a > 0:
        decades = math.log10(b / a)
        n = max(min_points, int(points_per_decade * decades) + 1)
        xs = np.geomspace(a, b, n)
    else:
        n = max(min_points, points_per_decade)
        xs = np.linspace(a, b, n)
    vals = _eval(f, xs)
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    roots = []
    for i in idx:
        root, _ = _brent(lambda x: float(f(x)), xs[i], xs[i + 1],
                         vals[i], vals[i + 1], 1e-13 * max(abs(xs[i]), 1.0))
        roots.append(float(root))
    return roots
