"""Two-wave-packet superpositions and their probability current.

Writing each packet as psi_j = exp(phi_j + i varphi_j) with real
log-amplitude phi_j and phase varphi_j, the current of the normalized
superposition sqrt(N)(psi_1 + psi_2) is

    j = N [ v1 rho1 + v2 rho2
            + (u1 - u2) sqrt(rho1 rho2) sin(varphi1 - varphi2)
            + (v1 + v2) sqrt(rho1 rho2) cos(varphi1 - varphi2) ]

with u_j = (hbar/m) d(phi_j)/dx, v_j = (hbar/m) d(varphi_j)/dx and
rho_j = exp(2 phi_j).  No spatial derivative of the full wave function is
ever formed numerically: the derivative evaluators are analytic, and an
equivalence test against numerical differentiation of the full complex
wave function guards the derivation.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import quadrature, toa_core
from .errors import DomainError

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PacketPhase:
    """Real/imaginary phase decomposition of one packet, with x-derivatives."""

    phi: Callable       # log-amplitude phi(x, t)
    varphi: Callable    # phase varphi(x, t), radians
    dphi_dx: Callable
    dvarphi_dx: Callable
    hbar: float
    mass: float
    center0: Optional[float] = None   # t=0 center, for normalization windows
    width0: Optional[float] = None    # t=0 spread, same purpose

    def density(self, x, t):
        return np.exp(2.0 * np.asarray(self.phi(x, t), dtype=float))


@dataclass(frozen=True)
class SuperpositionState:
    packet1: PacketPhase
    packet2: PacketPhase
    norm_factor: float

    def __post_init__(self):
        if not (self.norm_factor > 0 and math.isfinite(self.norm_factor)):
            raise ValueError(f"norm factor must be finite and > 0, got "
                             f"{self.norm_factor}")


def packet_velocities(packet, x, t):
    """(u, v, rho): amplitude velocity, phase velocity, and density."""
    x = np.asarray(x, dtype=float)
    scale = packet.hbar / packet.mass
    u = scale * np.asarray(packet.dphi_dx(x, t), dtype=float)
    v = scale * np.asarray(packet.dvarphi_dx(x, t), dtype=float)
    rho = packet.density(x, t)
    if u.ndim == 0:
        return float(u), float(v), float(rho)
    return u, v, rho


def free_gaussian_packet(params, a_j, k_j, sigma_j):
    """Freely evolving Gaussian packet: center a_j, wave vector k_j, width sigma_j.

    sigma_j is the position-density spread at t=0 (rho_j(x,0) is a normal
    density with std sigma_j).  The spread grows as
    sigma_j(t)^2 = sigma_j^2 + lambda(t)^4/(4 sigma_j^2) with
    lambda(t) = sqrt(hbar t / m); the constant phase carries the
    arccos(sigma_j/sigma_j(t))/2 spreading phase, whose principal branch is
    always valid since the ratio stays in (0, 1].
    """
    if sigma_j <= 0:
        raise DomainError(f"packet width must be > 0, got {sigma_j}")
    hbar, m = params.hbar, params.mass
    s2 = sigma_j * sigma_j

    def _shape(t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("free packet defined for t >= 0")
        lam2 = hbar * t / m
        st2 = s2 + lam2 * lam2 / (4.0 * s2)
        xc = a_j + hbar * k_j * t / m
        return lam2, st2, xc

    def phi(x, t):
        x = np.asarray(x, dtype=float)
        _, st2, xc = _shape(t)
        return -(x - xc) ** 2 / (4.0 * st2) - 0.25 * np.log(2.0 * np.pi * st2)

    def varphi(x, t):
        x = np.asarray(x, dtype=float)
        lam2, st2, xc = _shape(t)
        ratio = sigma_j / np.sqrt(st2)
        assert np.all((0.0 < ratio) & (ratio <= 1.0)), \
            "spreading phase left the arccos branch"
        chi = np.arccos(ratio)
        return (lam2 * (x - xc) ** 2 / (8.0 * s2 * st2) + k_j * x
                - k_j * k_j * lam2 / 2.0 - chi / 2.0)

    def dphi_dx(x, t):
        x = np.asarray(x, dtype=float)
        _, st2, xc = _shape(t)
        return -(x - xc) / (2.0 * st2)

    def dvarphi_dx(x, t):
        x = np.asarray(x, dtype=float)
        lam2, st2, xc = _shape(t)
        return lam2 * (x - xc) / (4.0 * s2 * st2) + k_j

    return PacketPhase(phi=phi, varphi=varphi, dphi_dx=dphi_dx,
                       dvarphi_dx=dvarphi_dx, hbar=hbar, mass=m,
                       center0=a_j, width0=sigma_j)


def superposition_density(state, x, t):
    """|psi|^2 of the superposition: individual densities plus interference."""
    p1, p2 = state.packet1, state.packet2
    x = np.asarray(x, dtype=float)
    r1 = p1.density(x, t)
    r2 = p2.density(x, t)
    dphase = np.asarray(p1.varphi(x, t)) - np.asarray(p2.varphi(x, t))
    out = state.norm_factor * (r1 + r2 + 2.0 * np.sqrt(r1 * r2) * np.cos(dphase))
    return float(out) if out.ndim == 0 else out


def superpose(packet1, packet2, *, window=None, rel_tol=1e-9):
    """Build the normalized superposition sqrt(N)(psi_1 + psi_2).

    N is computed numerically at t = 0 over +-12 max(width) around the
    packet centers (or an explicit (lo, hi) window for packets that do not
    carry center/width metadata).
    """
    if window is None:
        meta = [packet1.center0, packet2.center0,
                packet1.width0, packet2.width0]
        if any(v is None for v in meta):
            raise ValueError("packets carry no center/width metadata; pass "
                             "an explicit normalization window")
        w = 12.0 * max(packet1.width0, packet2.width0)
        window = (min(packet1.center0, packet2.center0) - w,
                  max(packet1.center0, packet2.center0) + w)
    probe = SuperpositionState(packet1, packet2, norm_factor=1.0)
    res = quadrature.integrate_finite(lambda x: superposition_density(probe, x, 0.0),
                                      window[0], window[1], rel_tol=rel_tol,
                                      abs_tol=1e-14)
    return SuperpositionState(packet1, packet2, norm_factor=1.0 / res.value)


def superposition_current(state, x, t):
    """Probability current of the superposition at (x, t)."""
    p1, p2 = state.packet1, state.packet2
    x = np.asarray(x, dtype=float)
    u1, v1, r1 = packet_velocities(p1, x, t)
    u2, v2, r2 = packet_velocities(p2, x, t)
    dphase = np.asarray(p1.varphi(x, t)) - np.asarray(p2.varphi(x, t))
    cross = np.sqrt(np.asarray(r1) * np.asarray(r2))
    out = state.norm_factor * (
        v1 * np.asarray(r1) + v2 * np.asarray(r2)
        + (u1 - u2) * cross * np.sin(dphase)
        + (v1 + v2) * cross * np.cos(dphase))
    return float(out) if np.ndim(out) == 0 else out


def superposition_field(state, *, n_width=15.0):
    """DensityField exposing both rho and j of the superposition.

    The a-domain tracks the moving, spreading packets so CDF integrals only
    cover the region that actually carries mass.
    """
    p1, p2 = state.packet1, state.packet2

    def domain(t):
        lo = math.inf
        hi = -math.inf
        for p in (p1, p2):
            # recover center/width at time t from the phase evaluators
            xc0 = p.center0 if p.center0 is not None else 0.0
            w0 = p.width0 if p.width0 is not None else 1.0
            lam2 = p.hbar * t / p.mass
            wt = math.sqrt(w0 * w0 + lam2 * lam2 / (4 * w0 * w0))
            k = float(p.dvarphi_dx(np.asarray(xc0), 0.0)) if t >= 0 else 0.0
            xc = xc0 + p.hbar * k * t / p.mass
            lo = min(lo, xc - n_width * wt)
            hi = max(hi, xc + n_width * wt)
        return lo, hi

    return toa_core.DensityField(
        rho=lambda t, x: superposition_density(state, x, t),
        current=lambda t, x: superposition_current(state, x, t),
        a_domain=domain, name="superposition")


def superposition_toa(state, x, grid, *, normalize=True):
    """Arrival-time distribution at position x from the superposition current."""
    field = superposition_field(state)
    return toa_core.toa_from_current(field, x, grid, normalize=normalize)
