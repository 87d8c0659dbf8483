"""Erosion profile of the phase-invariant ("true") safe basin.

The true safe basin is the intersection of the safe basins over all forcing
phases; on the cylinder it is the flat circle xi = xi_hat, so its area is
mu = 2*pi*J(xi_hat).  Sweeping the forcing amplitude F traces the erosion
profile mu(F), which drops abruptly at the saddle connection F_hat.
"""

import numpy as np

from wellescape.rm_analysis import erosion_profile, true_sb_level
from wellescape.slowflow import SystemParams

OMEGA = 0.89
XI_MAX = 0.1657

f_grid = np.linspace(0.001, 0.03, 30)
profile = erosion_profile(f_grid, OMEGA, XI_MAX)
print(f"critical forcing F_hat = {profile.f_hat:.7f}")
print(f"{'F':>10} {'xi_hat':>10} {'mu':>10}")
for e in profile.entries:
    print(f"{e.F:>10.6f} {e.xi_hat:>10.6f} {e.mu:>10.6f}")

# The jump at F_hat: just below, the safe level is the tangent-curve
# minimum; just above, it collapses to the saddle-curve minimum.
for F in (profile.f_hat * 0.999, profile.f_hat * 1.001):
    p = SystemParams(F=F, Omega=OMEGA, xi_max=XI_MAX)
    print(f"xi_hat({F:.6f}) = {true_sb_level(p):.6f}")
