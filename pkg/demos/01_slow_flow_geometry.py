"""Slow-flow building blocks of the cubic well V(q) = q^2/2 - q^3/3.

Walks through the layer everything else is built on: turning points of an
energy level, the action J(xi) and period T(xi) of the unforced orbit, the
forcing coefficient A(xi) of the averaged conservation law, and the
action-angle transform back to the (q, p)-plane.
"""

import math

import numpy as np

from wellescape.slowflow import (
    XI_BARRIER,
    CylinderPoint,
    action,
    conservation,
    forcing_coefficient,
    period,
    to_phase_plane,
    total_energy,
    well_geometry,
    SystemParams,
)

# The well supports bounded orbits for energies 0 < xi < 1/6; the barrier
# sits at q = 1 with V(1) = 1/6.
print("barrier energy:", XI_BARRIER)

# Turning points of a mid-well orbit.
g = well_geometry(0.1)
print(f"xi = 0.1 turning points: q_min = {g.q_min:.6f}, q_max = {g.q_max:.6f}"
      f" (far root c = {g.c:.6f})")

# Action grows monotonically from 0 at the bottom to 3/(5*pi) on the
# separatrix (loop area 6/5); the period grows from 2*pi and diverges
# logarithmically at the barrier.
for xi in (0.01, 0.05, 0.1, 0.15, XI_BARRIER):
    print(f"xi = {xi:.4f}  J = {action(xi):.6f}  T = "
          + (f"{period(xi):.4f}" if xi < XI_BARRIER else "inf"))
print("J at the separatrix vs 3/(5*pi):", action(XI_BARRIER), 3 / (5 * math.pi))

# The forcing coefficient A(xi) (half the first Fourier cosine coefficient
# of q along the orbit) vanishes at both ends of the energy range.
for xi in (0.0, 0.05, 0.1, 0.15, XI_BARRIER):
    print(f"A({xi:.4f}) = {forcing_coefficient(xi):.6f}")

# The averaged dynamics conserves C(theta, xi) = xi - F*A(xi)*cos(theta)
# - Omega*J(xi) on the (theta, xi)-cylinder.
params = SystemParams(F=0.012, Omega=0.89)
for theta in (0.0, math.pi / 2, math.pi):
    c = conservation(CylinderPoint(theta=theta, xi=0.1), params)
    print(f"C(theta={theta:.3f}, xi=0.1) = {c:.8f}")

# The transform Psi maps cylinder points onto the unforced orbit of that
# energy; the energy identity holds to round-off.
worst = 0.0
for theta in np.linspace(0.0, 2 * math.pi, 36, endpoint=False):
    pt = to_phase_plane(CylinderPoint(theta=float(theta), xi=0.1))
    worst = max(worst, abs(total_energy(pt) - 0.1))
print("max |E(Psi(theta, 0.1)) - 0.1| over 36 angles:", worst)
