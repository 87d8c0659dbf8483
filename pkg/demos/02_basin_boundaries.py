"""Safe-basin boundaries on the resonance manifold and the saddle connection.

The averaged flow on the (theta, xi)-cylinder has a saddle and a center near
the 1:1 resonance.  Two level sets bound the safe basins: the one through
the saddle (SBST) and the one tangent to the escape threshold at theta = pi
(SBMT).  The SBMT wraps the whole cylinder (kind II) for weak forcing and
detaches into a loop (kind I) above the critical forcing F_hat, where the
tangent level and the saddle level coincide.
"""

from wellescape.rm_analysis import (
    SBMT_I,
    SBMT_II,
    basin_area,
    critical_forcing,
    critical_points,
    sb_boundaries,
)
from wellescape.slowflow import SystemParams

OMEGA = 0.89
XI_MAX = 0.1657

params = SystemParams(F=0.012, Omega=OMEGA, xi_max=XI_MAX)
cps = critical_points(params)
print(f"saddle at (theta, xi) = ({cps.saddle.theta:.3f}, {cps.saddle.xi:.5f}),"
      f" level {cps.saddle.level:.6f}")
print(f"center at (theta, xi) = ({cps.center.theta:.3f}, {cps.center.xi:.5f}),"
      f" level {cps.center.level:.6f}")

sb = sb_boundaries(params, theta_count=720)
print("SBMT kind:", sb.sbmt.kind)
print("SBST area:", basin_area(sb.sbst, params))
print("SBMT area:", basin_area(sb.sbmt, params))

# The saddle connection: tangent level equals saddle level.
f_hat = critical_forcing(OMEGA, XI_MAX)
print(f"critical forcing F_hat({OMEGA}, {XI_MAX}) = {f_hat:.7f}")

for F, label in ((f_hat * 0.99, "below"), (f_hat * 1.01, "above")):
    p = SystemParams(F=F, Omega=OMEGA, xi_max=XI_MAX)
    kind = sb_boundaries(p).sbmt.kind
    expect = SBMT_II if label == "below" else SBMT_I
    print(f"F = {F:.6f} ({label} F_hat): SBMT kind {kind} (expected {expect})")

# F_hat grows with the forcing frequency.
for omega in (0.85, 0.87, 0.89, 0.91):
    print(f"F_hat({omega}) = {critical_forcing(omega, XI_MAX):.7f}")
