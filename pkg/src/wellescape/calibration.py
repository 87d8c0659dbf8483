"""Effective escape-threshold calibration by level-curve bisection.

The slow-flow picture treats every level curve of the conservation law below
the threshold as safe, but the chaotic layer near the separatrix erodes the
topmost curves.  This module finds the corrected threshold xi*: the highest
energy whose level curve through the center angle is still fully
non-escaping under brute-force simulation.  The escape indicator M maps a
level to {0, 1} with 0 = every curve sample safe and 1 = some sample
escapes; xi* is located by bisection between the center energy (M = 0) and
an escaping probe level (M = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from wellescape.errors import InconsistentCenterError, NoCurveError
from wellescape.rm_analysis import critical_points, level_curve
from wellescape.slowflow import (
    XI_BARRIER,
    CylinderPoint,
    SystemParams,
    conservation,
    to_phase_plane,
)
from wellescape.simulator import escape_batch

__all__ = [
    "SweepOutcome",
    "ThresholdResult",
    "effective_threshold",
    "mapping_M",
    "threshold_sweep",
]

# Highest level probed; level curves need strictly interior energies.
_XI_TOP = XI_BARRIER - 1e-6
_XI_LO = 1e-6


@dataclass(frozen=True)
class ThresholdResult:
    """Calibrated effective threshold for one forcing amplitude.

    ``xi_star`` is the last all-safe level, ``bracket_hi`` the escaping
    level above it (equal to the scan top when ``no_correction``).
    ``flagged`` marks results whose independent bracket re-check or
    local-constancy probes failed, indicating a pathological bracket.
    """

    F: float
    omega: float
    psi_used: float
    xi_star: float
    epsilon: float
    delta: float
    t_max_periods: int
    iterations: int
    bracket_hi: float
    no_correction: bool = False
    flagged: bool = False


@dataclass(frozen=True)
class SweepOutcome:
    """Results of a threshold sweep plus the per-F failures (F, message)."""

    results: tuple[ThresholdResult, ...]
    failures: tuple[tuple[float, str], ...]


@lru_cache(maxsize=64)
def _center(params: SystemParams) -> tuple[float, float]:
    """Center angle and energy of the slow flow; (pi, 0) in the F=0 limit
    where every level curve is a flat circle."""
    if params.F == 0.0:
        return math.pi, 0.0
    cp = critical_points(params)
    return cp.center.theta, cp.center.xi


def _curve_points(
    xi_tilde: float, params: SystemParams, delta: float
) -> list[CylinderPoint]:
    """Sample the level curve through (center angle, xi_tilde) at theta
    step delta.

    Both energy branches of the center-enclosing curve (the roots adjacent
    to the per-theta ridge of the conservation law) are pooled; other
    components of the same level set are excluded.  The defining point is
    always included, so the degenerate curve at the center energy is the
    center point itself.
    """
    if params.F == 0.0:
        thetas = np.arange(0.0, 2.0 * math.pi, delta)
        return [CylinderPoint(theta=float(t), xi=xi_tilde) for t in thetas]
    theta_star, _ = _center(params)
    level = conservation(CylinderPoint(theta=theta_star, xi=xi_tilde), params)
    thetas = np.arange(0.0, 2.0 * math.pi, delta)
    try:
        below, _ = level_curve(level, params, thetas, branch="below")
        above, _ = level_curve(level, params, thetas, branch="above")
    except NoCurveError:
        below, above = [], []
    return [CylinderPoint(theta=theta_star, xi=xi_tilde), *below, *above]


def mapping_M(
    xi_tilde: float,
    params: SystemParams,
    delta: float = 0.01,
    t_max_periods: int = 100,
) -> int:
    """Escape indicator of a level: 0 if every sample of the level curve
    through the center angle survives t_max_periods, 1 if any escapes.

    Curve samples are mapped to the phase plane with angle offset psi and
    classified against the barrier energy 1/6.
    """
    pts = _curve_points(xi_tilde, params, delta)
    q0 = np.empty(len(pts))
    p0 = np.empty(len(pts))
    for i, pt in enumerate(pts):
        pp = to_phase_plane(pt, angle_offset=params.psi)
        q0[i], p0[i] = pp.q, pp.p
    sim_params = SystemParams(
        F=params.F, Omega=params.Omega, psi=params.psi, xi_max=XI_BARRIER
    )
    escaped, _, _ = escape_batch(q0, p0, sim_params, t_max_periods=t_max_periods)
    return int(escaped.any())


def effective_threshold(
    F: float,
    omega: float,
    psi_used: float = 0.0,
    epsilon: float = 0.001,
    delta: float = 0.01,
    t_max_periods: int = 100,
) -> ThresholdResult:
    """Bisect for the effective threshold xi*.

    Scans upward from the center energy in steps of 5*epsilon until the
    indicator flips to 1, then bisects the bracket down to epsilon.  If no
    level up to the scan top escapes, the top is returned with the
    no-correction flag set.
    """
    if epsilon <= 0.0 or delta <= 0.0:
        raise ValueError("epsilon and delta must be positive")
    params = SystemParams(F=F, Omega=omega, psi=psi_used, xi_max=XI_BARRIER)
    _, xi_c = _center(params)
    lo = max(xi_c, _XI_LO)

    def m(x: float) -> int:
        return mapping_M(x, params, delta, t_max_periods)

    if m(lo) == 1:
        raise InconsistentCenterError(
            f"level curve at the center energy {lo!r} already escapes; "
            "forcing too large for threshold calibration"
        )
    hi = None
    x = lo
    while x < _XI_TOP:
        x = min(x + 5.0 * epsilon, _XI_TOP)
        if m(x) == 1:
            hi = x
            break
        lo = x
    if hi is None:
        return ThresholdResult(
            F=F, omega=omega, psi_used=psi_used, xi_star=_XI_TOP,
            epsilon=epsilon, delta=delta, t_max_periods=t_max_periods,
            iterations=0, bracket_hi=_XI_TOP, no_correction=True,
        )
    iterations = 0
    while hi - lo > epsilon:
        mid = 0.5 * (lo + hi)
        if m(mid) == 1:
            hi = mid
        else:
            lo = mid
        iterations += 1
    # Independent bracket re-check plus local-constancy probes.
    flagged = m(lo) != 0 or m(hi) != 1
    probe = epsilon / 10.0
    if not flagged:
        flagged = (
            m(max(lo - probe, max(xi_c, _XI_LO))) != 0
            or m(min(hi + probe, _XI_TOP)) != 1
            or m(lo) != 0
        )
    return ThresholdResult(
        F=F, omega=omega, psi_used=psi_used, xi_star=lo,
        epsilon=epsilon, delta=delta, t_max_periods=t_max_periods,
        iterations=iterations, bracket_hi=hi, flagged=flagged,
    )


def threshold_sweep(
    f_grid,
    omega: float,
    psi_used: float = 0.0,
    epsilon: float = 0.001,
    delta: float = 0.01,
    t_max_periods: int = 100,
) -> SweepOutcome:
    """Effective thresholds over an increasing grid of forcing amplitudes.

    Per-entry errors are collected as (F, message) pairs and the sweep
    continues with the next amplitude.
    """
    f_grid = [float(f) for f in f_grid]
    if any(b <= a for a, b in zip(f_grid, f_grid[1:])):
        raise ValueError("f_grid must be strictly increasing")
    results = []
    failures = []
    for F in f_grid:
        try:
            results.append(
                effective_threshold(F, omega, psi_used, epsilon, delta, t_max_periods)
            )
        except Exception as exc:  # noqa: BLE001 - sweep must survive any entry
            failures.append((F, f"{type(exc).__name__}: {exc}"))
    return SweepOutcome(results=tuple(results), failures=tuple(failures))
