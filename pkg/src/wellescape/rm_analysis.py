"""Analysis of the slow flow on the (theta, xi)-cylinder.

Critical points, safe-basin boundary curves (saddle type and maximum type),
the critical forcing amplitude at the saddle connection, the phase-invariant
("true") safe-basin level, basin areas and erosion profiles.

Conventions established by the slow-flow geometry: the saddle of the
conservation law sits on theta = 0 and the center on theta = pi (verified at
runtime, never assumed silently).  The maximum-type boundary is the level
set through (theta_center, xi_max); it wraps the cylinder (kind II) while
its level stays below the saddle level and closes into a loop around the
center (kind I) above it.  The transition is the saddle connection.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from wellescape.errors import (
    DegenerateFlowError,
    DomainError,
    GeometryError,
    NoConnectionError,
    NoCurveError,
    NoResonanceError,
)
from wellescape.slowflow import (
    XI_BARRIER,
    XI_EDGE_MARGIN,
    CylinderPoint,
    SystemParams,
    action,
    forcing_coefficient,
    period,
    to_phase_plane,
)

__all__ = [
    "SBST",
    "SBMT_I",
    "SBMT_II",
    "BasinBoundary",
    "CriticalPoint",
    "CriticalPoints",
    "ErosionEntry",
    "ErosionProfile",
    "basin_area",
    "basin_area_shoelace",
    "conservation_level",
    "critical_forcing",
    "critical_points",
    "d_conservation_dxi",
    "erosion_profile",
    "level_curve",
    "sb_boundaries",
    "true_sb_level",
]

SBST = "SBST"
SBMT_I = "SBMT_I"
SBMT_II = "SBMT_II"

# Working energy range for root bracketing; the domain edges themselves are
# excluded (action/period limits are handled explicitly where needed).
_XI_LO = 1e-6
_XI_HI = XI_BARRIER - 1e-6
_PRESCAN = 256
_LEVEL_RESIDUAL_TOL = 1e-9
_DEFAULT_THETA_COUNT = 720


@lru_cache(maxsize=1 << 18)
def _action(xi: float) -> float:
    return action(xi)


@lru_cache(maxsize=1 << 18)
def _forcing_coefficient(xi: float) -> float:
    return forcing_coefficient(xi)


@lru_cache(maxsize=1 << 18)
def _dA(xi: float) -> float:
    # 5-point central difference; the coefficient is smooth on (0, 1/6).
    h = min(1e-4, 0.25 * (xi - _XI_LO * 0.5), 0.25 * (XI_BARRIER - 1e-9 - xi))
    if h <= 0.0:
        raise DomainError(f"energy {xi!r} too close to the domain edge")
    f = _forcing_coefficient
    return (f(xi - 2 * h) - 8 * f(xi - h) + 8 * f(xi + h) - f(xi + 2 * h)) / (12 * h)


def conservation_level(theta: float, xi: float, params: SystemParams) -> float:
    """C(theta, xi) with memoized xi-dependent terms (scan-friendly)."""
    return (
        xi
        - params.F * _forcing_coefficient(xi) * math.cos(theta)
        - params.Omega * _action(xi)
    )


def d_conservation_dxi(theta: float, xi: float, params: SystemParams) -> float:
    """Partial derivative of the conservation law with respect to xi."""
    return 1.0 - params.F * _dA(xi) * math.cos(theta) - params.Omega * period(xi) / (2.0 * math.pi)


@dataclass(frozen=True)
class CriticalPoint:
    theta: float
    xi: float
    level: float


@dataclass(frozen=True)
class CriticalPoints:
    saddle: CriticalPoint
    center: CriticalPoint


@dataclass(frozen=True)
class BasinBoundary:
    """Sampled boundary curve of a safe basin on the cylinder.

    ``samples`` holds the curve (for a kind-I loop: its upper branch);
    ``lower_samples`` holds the matching lower branch of a kind-I loop;
    ``theta_gap`` is the (wrapping) theta interval around the saddle angle
    where a kind-I boundary does not exist.
    """

    kind: str
    level: float
    samples: list[CylinderPoint]
    lower_samples: list[CylinderPoint] | None = None
    theta_gap: tuple[float, float] | None = None


@dataclass(frozen=True)
class SafeBasinBoundaries:
    sbst: BasinBoundary | None
    sbmt: BasinBoundary | None


@dataclass(frozen=True)
class ErosionEntry:
    F: float
    xi_hat: float
    mu: float


@dataclass(frozen=True)
class ErosionProfile:
    entries: list[ErosionEntry]
    omega: float
    xi_max: float
    f_hat: float


def _clamp_xi(xi: float) -> float:
    # The upper clamp sits one margin below the root-scan ceiling _XI_HI so
    # that a tangency point at the clamped energy stays inside the scanned
    # range at every theta.
    return min(max(xi, _XI_LO), XI_BARRIER - 2e-6)


def _xi_top(xi_max: float) -> float:
    """Tangency energy for the maximum-type level.

    A threshold at the barrier keeps its exact value: the conservation law
    extends there through the limits of A and J, and clamping instead would
    distort the level badly because A decays only logarithmically.
    """
    if xi_max >= XI_BARRIER - XI_EDGE_MARGIN:
        return XI_BARRIER
    return _clamp_xi(xi_max)


def _scan_roots(f, lo: float, hi: float, n: int = _PRESCAN) -> list[float]:
    """All sign-change roots of a scalar function on [lo, hi]."""
    xs = np.linspace(lo, hi, n)
    vals = np.array([f(float(x)) for x in xs])
    roots = []
    for i in range(n - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(xs[i]))
        elif a * b < 0.0:
            roots.append(brentq(f, float(xs[i]), float(xs[i + 1]), xtol=1e-14, rtol=8.9e-16))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


@lru_cache(maxsize=1 << 16)
def _ridge_xi(theta: float, params: SystemParams) -> float | None:
    """Energy of the dominant per-theta maximum of C(theta, .), if any."""
    roots = _scan_roots(lambda x: d_conservation_dxi(theta, x, params), _XI_LO, _XI_HI)
    best = None
    for r in roots:
        h = min(1e-5, 0.5 * (_XI_HI - r), 0.5 * (r - _XI_LO))
        if h <= 0.0:
            continue
        curv = (
            d_conservation_dxi(theta, r + h, params)
            - d_conservation_dxi(theta, r - h, params)
        ) / (2.0 * h)
        if curv < 0.0:
            if best is None or conservation_level(theta, r, params) > conservation_level(theta, best, params):
                best = r
    return best


def critical_points(params: SystemParams) -> CriticalPoints:
    """Saddle and center of the slow flow, located on theta in {0, pi}.

    Roots of dC/dxi are bracketed on the two symmetry lines and classified
    by the sign pattern of the second derivatives (the mixed derivative
    vanishes on both lines).
    """
    if params.F == 0.0:
        raise DegenerateFlowError("conservation law is independent of theta at F = 0")
    saddle = None
    center = None
    for theta in (0.0, math.pi):
        roots = _scan_roots(lambda x: d_conservation_dxi(theta, x, params), _XI_LO, _XI_HI)
        for xi in roots:
            h = min(1e-5, 0.5 * (_XI_HI - xi), 0.5 * (xi - _XI_LO))
            if h <= 0.0:
                continue
            c_xx = (
                d_conservation_dxi(theta, xi + h, params)
                - d_conservation_dxi(theta, xi - h, params)
            ) / (2.0 * h)
            c_tt = params.F * _forcing_coefficient(xi) * math.cos(theta)
            # The resonance pair are the per-line ridge maxima (c_xx < 0).
            # Other roots (a forcing-induced pair near the well bottom, edge
            # artifacts near the barrier) are not part of the 1:1 structure.
            if c_xx >= 0.0:
                continue
            point = CriticalPoint(theta=theta, xi=xi, level=conservation_level(theta, xi, params))
            if c_tt > 0.0 and (saddle is None or point.level > saddle.level):
                saddle = point
            elif c_tt < 0.0 and (center is None or point.level > center.level):
                center = point
    if saddle is None or center is None:
        raise NoResonanceError(
            f"no saddle/center pair found for F={params.F}, Omega={params.Omega}"
        )
    if saddle.theta == center.theta:
        raise NoResonanceError("saddle and center collapsed onto the same symmetry line")
    return CriticalPoints(saddle=saddle, center=center)


def level_curve(
    level: float,
    params: SystemParams,
    thetas,
    branch: str,
    tangency_tol: float = _LEVEL_RESIDUAL_TOL,
) -> tuple[list[CylinderPoint], list[float]]:
    """Solve C(theta, xi) = level for xi at each theta of the grid.

    ``branch`` selects the root on the ascending ("below") or descending
    ("above") side of the per-theta ridge of C.  Near-tangent double roots
    (residual within ``tangency_tol`` at the ridge) are accepted, which
    covers the saddle lying on its own level set.  Thetas with no root are
    omitted from the result and returned as the gap list.
    """
    if branch not in ("below", "above"):
        raise ValueError(f"branch must be 'below' or 'above', got {branch!r}")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if thetas.size < 3:
        raise ValueError("theta grid must have at least 3 points")
    points: list[CylinderPoint] = []
    gaps: list[float] = []
    for theta in thetas:
        theta = float(theta)
        f = lambda x: conservation_level(theta, x, params) - level
        ridge = _ridge_xi(theta, params)
        roots = _scan_roots(f, _XI_LO, _XI_HI)
        pick: float | None = None
        if ridge is not None:
            # Branch roots are taken relative to the dominant ridge of
            # C(theta, .); slope filtering alone would admit roots from the
            # forcing-induced fold near the well bottom.
            ascending = [
                r for r in roots
                if r <= ridge and d_conservation_dxi(theta, r, params) > 0.0
            ]
            descending = [
                r for r in roots
                if r >= ridge and d_conservation_dxi(theta, r, params) < 0.0
            ]
            if branch == "below" and ascending:
                pick = max(ascending)
            elif branch == "above" and descending:
                pick = min(descending)
            if pick is None:
                fr = f(ridge)
                if abs(fr) <= tangency_tol:
                    pick = ridge
                elif fr > 0.0:
                    # Nearly tangent: the root pair straddles the ridge
                    # within one prescan cell; bracket it locally.
                    step = (_XI_HI - _XI_LO) / (_PRESCAN - 1)
                    sign = -1.0 if branch == "below" else 1.0
                    probe = ridge
                    for _ in range(4):
                        probe += sign * step
                        if not (_XI_LO <= probe <= _XI_HI):
                            break
                        if f(probe) < 0.0:
                            lo, hi = sorted((probe, ridge))
                            pick = brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16)
                            break
                if (
                    pick is None
                    and branch == "above"
                    and fr > tangency_tol
                    and f(XI_BARRIER) <= tangency_tol
                ):
                    # The descending root is pinched between the scan
                    # ceiling and the barrier (a barrier-tangent level set
                    # hugs the barrier circle there); clamp to the ceiling.
                    pick = _XI_HI
        if pick is None:
            gaps.append(theta)
        else:
            points.append(CylinderPoint(theta=theta, xi=pick))
    if not points:
        raise NoCurveError(f"level {level!r} has no curve in the sampled range")
    return points, gaps


def _refine_gap_edge(theta_in: float, theta_out: float, level: float, params: SystemParams) -> float:
    """Bisect in theta for the edge where the ridge value crosses the level.

    ``theta_in`` has no root (ridge below level side), ``theta_out`` has one.
    """
    def ridge_excess(theta: float) -> float:
        ridge = _ridge_xi(theta, params)
        if ridge is None:
            return -math.inf
        return conservation_level(theta, ridge, params) - level

    lo, hi = theta_in, theta_out
    for _ in range(64):
        if abs(hi - lo) <= 1e-6:
            break
        mid = 0.5 * (lo + hi)
        if ridge_excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sb_boundaries(
    params: SystemParams, theta_count: int = _DEFAULT_THETA_COUNT
) -> SafeBasinBoundaries:
    """Boundary curves of the saddle-type and maximum-type safe basins.

    The maximum-type level passes through (theta_tangent, xi_max); the
    tangency angle is located as the argmax of C(., xi_max) and checked
    against the center angle.  Kind II if the curve covers every sampled
    theta, kind I otherwise (with the theta gap refined by bisection).
    """
    cps = critical_points(params)
    thetas = np.linspace(0.0, 2.0 * math.pi, theta_count, endpoint=False)

    xi_top = _xi_top(params.xi_max)
    if xi_top == XI_BARRIER:
        # A vanishes at the barrier, so C(., xi_top) is flat; the limiting
        # tangency direction is the center angle.
        tangent_theta = cps.center.theta
    else:
        coarse = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        tangent_theta = float(coarse[np.argmax([conservation_level(t, xi_top, params) for t in coarse])])
        if not math.isclose(tangent_theta, cps.center.theta, abs_tol=2.0 * math.pi / 64 + 1e-12):
            raise GeometryError(
                f"tangency angle {tangent_theta} does not match the center angle {cps.center.theta}"
            )
    level_m = conservation_level(cps.center.theta, xi_top, params)

    sbst_points, sbst_gaps = level_curve(cps.saddle.level, params, thetas, branch="below")
    if sbst_gaps:
        raise GeometryError("saddle-type boundary unexpectedly fails to wrap the cylinder")
    sbst = BasinBoundary(kind=SBST, level=cps.saddle.level, samples=sbst_points)

    upper, gaps = level_curve(level_m, params, thetas, branch="above")
    if not gaps:
        sbmt = BasinBoundary(kind=SBMT_II, level=level_m, samples=upper)
    else:
        lower, lower_gaps = level_curve(level_m, params, thetas, branch="below")
        lower_by_theta = {pt.theta: pt for pt in lower}
        matched_upper = [pt for pt in upper if pt.theta in lower_by_theta]
        matched_lower = [lower_by_theta[pt.theta] for pt in matched_upper]
        covered = sorted(pt.theta for pt in matched_upper)
        gap_end = _refine_gap_edge(max((g for g in gaps if g < math.pi), default=0.0),
                                   covered[0], level_m, params)
        gap_start = _refine_gap_edge(
            min((g for g in gaps if g > math.pi), default=2.0 * math.pi - 1e-9),
            covered[-1], level_m, params)
        sbmt = BasinBoundary(
            kind=SBMT_I,
            level=level_m,
            samples=matched_upper,
            lower_samples=matched_lower,
            theta_gap=(gap_start, gap_end),
        )
    return SafeBasinBoundaries(sbst=sbst, sbmt=sbmt)


def critical_forcing(
    omega: float,
    xi_max: float,
    f_lo: float = 1e-5,
    f_hi: float = 0.2,
    residual_tol: float = 1e-10,
) -> float:
    """Forcing amplitude of the saddle connection.

    Solves C(pi, xi_max; F) = C(0, xi_saddle(F); F) for F, recomputing the
    saddle per iterate, by bracketing plus Brent's method.
    """
    if not (0.0 < xi_max <= XI_BARRIER):
        raise DomainError(f"threshold must lie in (0, 1/6], got {xi_max!r}")
    xi_top = _xi_top(xi_max)

    def residual(F: float) -> float:
        params = SystemParams(F=F, Omega=omega, xi_max=xi_max)
        cps = critical_points(params)
        return conservation_level(math.pi, xi_top, params) - cps.saddle.level

    fs = np.geomspace(f_lo, f_hi, 40)
    prev_f, prev_r = None, None
    bracket = None
    for F in fs:
        try:
            r = residual(float(F))
        except (NoResonanceError, DegenerateFlowError):
            prev_f, prev_r = None, None
            continue
        if prev_r is not None and prev_r * r <= 0.0:
            bracket = (prev_f, float(F))
            break
        prev_f, prev_r = float(F), r
    if bracket is None:
        raise NoConnectionError(
            f"no saddle connection in F range [{f_lo}, {f_hi}] at Omega={omega}"
        )
    f_hat = brentq(residual, bracket[0], bracket[1], xtol=1e-14, rtol=8.9e-16)
    if abs(residual(f_hat)) > residual_tol:
        raise NoConnectionError(f"saddle-connection residual above {residual_tol} at F={f_hat}")
    return float(f_hat)


def _branch_root_at(theta: float, level: float, params: SystemParams, branch: str) -> float:
    points, _ = level_curve(level, params, np.array([theta, theta, theta]), branch=branch)
    return points[0].xi


def true_sb_level(params: SystemParams) -> float:
    """Energy level of the phase-invariant safe basin boundary circle.

    Below the saddle connection this is the minimum of the maximum-type
    boundary (attained at theta = 0); at and above it, the minimum of the
    saddle-type boundary (attained at theta = pi).  Returns 0 when the
    basin is fully eroded: either the saddle level drops below the whole
    theta = pi line (the saddle-type boundary no longer wraps) or the
    resonance pair has annihilated at strong forcing.
    """
    if params.F == 0.0:
        return params.xi_max
    try:
        cps = critical_points(params)
    except NoResonanceError:
        return 0.0
    level_m = conservation_level(cps.center.theta, _xi_top(params.xi_max), params)
    try:
        if level_m < cps.saddle.level:
            return _branch_root_at(cps.saddle.theta, level_m, params, branch="above")
        return _branch_root_at(cps.center.theta, cps.saddle.level, params, branch="below")
    except NoCurveError:
        return 0.0


def erosion_profile(f_grid, omega: float, xi_max: float) -> ErosionProfile:
    """True-safe-basin level and area over a forcing-amplitude sweep.

    The jump at the saddle connection is bracketed by inserting points just
    below and above the critical forcing automatically.
    """
    f_grid = sorted(float(F) for F in f_grid)
    if not f_grid:
        raise ValueError("forcing grid must be nonempty")
    if any(b <= a for a, b in zip(f_grid, f_grid[1:])):
        raise ValueError("forcing grid must be strictly increasing")
    f_hat = critical_forcing(omega, xi_max)
    for F in (f_hat * (1.0 - 1e-6), f_hat * (1.0 + 1e-6)):
        if f_grid[0] < F < f_grid[-1]:
            f_grid.insert(bisect_left(f_grid, F), F)
    entries = []
    for F in f_grid:
        xi_hat = true_sb_level(SystemParams(F=F, Omega=omega, xi_max=xi_max))
        entries.append(ErosionEntry(F=F, xi_hat=xi_hat, mu=2.0 * math.pi * action(xi_hat)))
    return ErosionProfile(entries=entries, omega=omega, xi_max=xi_max, f_hat=f_hat)


def _is_flat_circle(boundary: BasinBoundary) -> bool:
    xis = [pt.xi for pt in boundary.samples]
    return boundary.lower_samples is None and max(xis) - min(xis) < 1e-12


def basin_area(boundary: BasinBoundary, params: SystemParams) -> float:
    """Area of the mapped basin on the (q, p)-plane.

    Uses the canonical quadrature: the Jacobian determinant is dJ/dxi, so
    the area under a curve xi(theta) is the theta-integral of J(xi(theta)).
    A flat circle reduces exactly to 2*pi*J(xi).  Kind-I loops integrate
    the action difference between the two branches.
    """
    if not boundary.samples:
        raise GeometryError("boundary has no samples")
    if _is_flat_circle(boundary):
        return 2.0 * math.pi * action(boundary.samples[0].xi)
    pts = sorted(boundary.samples, key=lambda pt: pt.theta)
    thetas = np.array([pt.theta for pt in pts])
    upper_J = np.array([_action(pt.xi) for pt in pts])
    if boundary.lower_samples is None:
        # Full wrap: periodic trapezoid over [0, 2*pi).
        thetas_ext = np.append(thetas, thetas[0] + 2.0 * math.pi)
        J_ext = np.append(upper_J, upper_J[0])
        return float(np.trapezoid(J_ext, thetas_ext))
    lower_by_theta = {pt.theta: pt for pt in boundary.lower_samples}
    lower_J = np.array([_action(lower_by_theta[pt.theta].xi) for pt in pts])
    return float(np.trapezoid(upper_J - lower_J, thetas))


def _polygon_self_intersects(q: np.ndarray, p: np.ndarray) -> bool:
    """Check a closed polygon for properly crossing non-adjacent edges."""
    n = q.size
    a = np.stack([q, p], axis=1)
    b = np.roll(a, -1, axis=0)
    d = b - a
    # Pairwise orientation tests, vectorized over segment pairs.
    cross = lambda u, v: u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    i, j = np.triu_indices(n, k=2)
    adjacent = (i == 0) & (j == n - 1)
    i, j = i[~adjacent], j[~adjacent]
    d1 = cross(d[i], a[j] - a[i]) * cross(d[i], b[j] - a[i])
    d2 = cross(d[j], a[i] - a[j]) * cross(d[j], b[i] - a[j])
    return bool(np.any((d1 < 0) & (d2 < 0)))


def basin_area_shoelace(boundary: BasinBoundary, params: SystemParams) -> float:
    """Cross-check area: shoelace formula on the mapped boundary polygon.

    A full-wrap curve maps to a closed loop around the well bottom; a
    kind-I loop is closed by joining the two branches.
    """
    pts = sorted(boundary.samples, key=lambda pt: pt.theta)
    if boundary.lower_samples is not None:
        lower_by_theta = {pt.theta: pt for pt in boundary.lower_samples}
        pts = pts + [lower_by_theta[pt.theta] for pt in reversed(pts)]
    mapped = [to_phase_plane(pt) for pt in pts]
    q = np.array([m.q for m in mapped])
    p = np.array([m.p for m in mapped])
    if _polygon_self_intersects(q, p):
        raise GeometryError("mapped boundary polygon is self-intersecting")
    return float(0.5 * abs(np.sum(q * np.roll(p, -1) - np.roll(q, -1) * p)))
