"""Cubic-well geometry, action, period, the slow-flow conservation law and
the cylinder -> phase-plane transform.

The well is V(q) = q^2/2 - q^3/3 with barrier energy 1/6.  The slow flow
lives on the (theta, xi)-cylinder, theta being the slow phase and xi the
averaged energy.  All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from wellescape.elliptic import complete_E, complete_K, jacobi, nome
from wellescape.errors import DomainError

__all__ = [
    "XI_BARRIER",
    "XI_EDGE_MARGIN",
    "CylinderPoint",
    "PhasePoint",
    "SystemParams",
    "WellGeometry",
    "action",
    "conservation",
    "forcing_coefficient",
    "jacobian_det",
    "period",
    "potential",
    "to_phase_plane",
    "total_energy",
    "well_geometry",
]

XI_BARRIER = 1.0 / 6.0
# Energies closer than this to the barrier are rejected by the interior
# operations; the separatrix limit is handled explicitly by callers.
XI_EDGE_MARGIN = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Forcing amplitude, frequency, phase and the escape energy threshold."""

    F: float
    Omega: float
    psi: float = 0.0
    xi_max: float = XI_BARRIER

    def __post_init__(self) -> None:
        if not (math.isfinite(self.F) and self.F >= 0.0):
            raise DomainError(f"forcing amplitude must be >= 0, got {self.F!r}")
        if not (math.isfinite(self.Omega) and self.Omega > 0.0):
            raise DomainError(f"forcing frequency must be > 0, got {self.Omega!r}")
        if not math.isfinite(self.psi):
            raise DomainError(f"forcing phase must be finite, got {self.psi!r}")
        if not (0.0 < self.xi_max <= XI_BARRIER):
            raise DomainError(
                f"escape threshold must lie in (0, 1/6], got {self.xi_max!r}"
            )


@dataclass(frozen=True)
class CylinderPoint:
    """Point on the (theta, xi)-cylinder: slow phase and averaged energy."""

    theta: float
    xi: float


@dataclass(frozen=True)
class PhasePoint:
    """Point on the (q, p) phase plane."""

    q: float
    p: float


@dataclass(frozen=True)
class WellGeometry:
    """Per-energy quantities of the unforced well at energy xi:
    auxiliary angle z, elliptic modulus k and the three turning points
    q_min < q_max <= c of V(q) = xi."""

    xi: float
    z: float
    k: float
    q_min: float
    q_max: float
    c: float


def potential(q: float) -> float:
    """Cubic well potential V(q) = q^2/2 - q^3/3."""
    return q * q / 2.0 - q * q * q / 3.0


def total_energy(pt: PhasePoint) -> float:
    """Total energy E = p^2/2 + V(q)."""
    return pt.p * pt.p / 2.0 + potential(pt.q)


def _check_interior_xi(xi: float) -> None:
    if not math.isfinite(xi) or xi <= 0.0 or xi >= XI_BARRIER - XI_EDGE_MARGIN:
        raise DomainError(f"energy must lie strictly inside (0, 1/6), got {xi!r}")


def well_geometry(xi: float) -> WellGeometry:
    """Turning points and elliptic modulus at interior energy xi in (0, 1/6)."""
    _check_interior_xi(xi)
    z = math.acos(1.0 - 12.0 * xi) / 3.0
    q_min = 0.5 - math.sin(z + math.pi / 6.0)
    q_max = 0.5 - math.sin(math.pi / 6.0 - z)
    c = 0.5 + math.cos(z)
    k2 = math.sin(z) / math.sin(2.0 * math.pi / 3.0 - z)
    k = math.sqrt(min(1.0, max(0.0, k2)))
    return WellGeometry(xi=xi, z=z, k=k, q_min=q_min, q_max=q_max, c=c)


_ACTION_PREFACTOR = 2.0 * math.sqrt(2.0) / (3.0 ** 0.25 * 5.0 * math.pi)
ACTION_AT_BARRIER = 3.0 / (5.0 * math.pi)  # separatrix loop area 6/5 over 2*pi


def action(xi: float) -> float:
    """Averaged action J(xi) of the unforced orbit, closed form in K and E.

    Defined on [0, 1/6]; J(0) = 0 and J(1/6) = 3/(5*pi) (the K-term limit
    vanishes since its coefficient beats the logarithmic divergence).
    """
    if not math.isfinite(xi) or xi < 0.0 or xi > XI_BARRIER:
        raise DomainError(f"energy must lie in [0, 1/6], got {xi!r}")
    if xi == 0.0:
        return 0.0
    if xi >= XI_BARRIER - XI_EDGE_MARGIN:
        return ACTION_AT_BARRIER
    g = well_geometry(xi)
    term_E = 1.5 * complete_E(g.k)
    term_K = math.sqrt(3.0) * math.sin(math.pi / 3.0 - g.z) * math.cos(g.z) * complete_K(g.k)
    return _ACTION_PREFACTOR * math.sqrt(math.sin(2.0 * math.pi / 3.0 - g.z)) * (term_E - term_K)


def period(xi: float) -> float:
    """Oscillation period T(xi) = 2*sqrt(6)*K(k)/sqrt(c - q_min).

    Diverges at the barrier; energies within 1e-12 of 1/6 are rejected.
    Equals 2*pi*dJ/dxi.
    """
    _check_interior_xi(xi)
    g = well_geometry(xi)
    return 2.0 * math.sqrt(6.0) * complete_K(g.k) / math.sqrt(g.c - g.q_min)


def forcing_coefficient(xi: float) -> float:
    """Coefficient of the F*cos(theta) term in the conservation law:
    pi^2*sqrt(3)*sin(z) / (k^2*K^2(k)) * Q/(1 - Q^2), with Q the nome.

    Equals half the magnitude of the first Fourier cosine coefficient of
    q(theta, xi).  Positive on (0, 1/6); the limit at both the well bottom
    and the barrier is 0 and is returned exactly there (the barrier decay
    is only logarithmic, so nearby interior values are far from 0).
    """
    if not math.isfinite(xi) or xi < 0.0 or xi > XI_BARRIER:
        raise DomainError(f"energy must lie in [0, 1/6], got {xi!r}")
    if xi == 0.0 or xi >= XI_BARRIER - XI_EDGE_MARGIN:
        return 0.0
    g = well_geometry(xi)
    K = complete_K(g.k)
    Q = nome(g.k)
    return (
        math.pi ** 2 * math.sqrt(3.0) * math.sin(g.z)
        / (g.k ** 2 * K * K)
        * Q / (1.0 - Q * Q)
    )


def conservation(pt: CylinderPoint, params: SystemParams) -> float:
    """Slow-flow first integral
    C(theta, xi) = xi - F*A(xi)*cos(theta) - Omega*J(xi),
    with A the forcing coefficient.  2*pi-periodic and even in theta.
    Defined on the closed energy range [0, 1/6] through the A and J limits."""
    if not math.isfinite(pt.xi) or pt.xi < 0.0 or pt.xi > XI_BARRIER:
        raise DomainError(f"energy must lie in [0, 1/6], got {pt.xi!r}")
    return (
        pt.xi
        - params.F * forcing_coefficient(pt.xi) * math.cos(pt.theta)
        - params.Omega * action(pt.xi)
    )


def to_phase_plane(pt: CylinderPoint, angle_offset: float = 0.0) -> PhasePoint:
    """Map a cylinder point to the (q, p) phase plane.

    The oscillator angle is u = theta + angle_offset; callers pass the
    forcing phase psi as the offset so that at t = 0 the angle is
    theta + psi, and 0 for pure-cylinder work.  Satisfies the energy
    identity p^2/2 + V(q) = xi exactly (up to roundoff) through the
    factorization 2*(xi - V(q)) = (2/3)*(q - q_min)*(q_max - q)*(c - q).
    """
    g = well_geometry(pt.xi)
    u = pt.theta + angle_offset
    ev = jacobi(u * complete_K(g.k) / math.pi, g.k)
    dq = g.q_max - g.q_min
    q = g.q_min + dq * ev.sn * ev.sn
    p = math.sqrt(2.0 / 3.0) * math.sqrt(g.c - g.q_min) * dq * ev.sn * ev.cn * ev.dn
    return PhasePoint(q=q, p=p)


def jacobian_det(pt: CylinderPoint) -> float:
    """Determinant of the cylinder -> phase-plane Jacobian.

    Equals dJ/dxi = T(xi)/(2*pi), independent of theta because the
    underlying angle-action pair is canonical."""
    return period(pt.xi) / (2.0 * math.pi)
