"""Effective-threshold calibration tests: the escape indicator, the
bisection bracket invariants, sweep behavior and determinism."""

import math

import pytest

from wellescape.calibration import (
    SweepOutcome,
    ThresholdResult,
    effective_threshold,
    mapping_M,
    threshold_sweep,
)
from wellescape.errors import InconsistentCenterError
from wellescape.rm_analysis import critical_points
from wellescape.slowflow import XI_BARRIER, SystemParams

OMEGA = 0.89
# Coarser-than-default settings keep single tests at a few seconds; the
# bracket invariants below do not depend on resolution.
EPS = 0.002
DELTA = 0.05


def _params(F):
    return SystemParams(F=F, Omega=OMEGA, psi=0.0, xi_max=XI_BARRIER)


class TestIndicator:
    def test_center_level_is_safe(self):
        p = _params(0.012)
        xi_c = critical_points(p).center.xi
        assert mapping_M(xi_c, p, delta=DELTA) == 0

    def test_near_barrier_level_escapes(self):
        p = _params(0.012)
        assert mapping_M(XI_BARRIER - 1e-6, p, delta=DELTA) == 1

    def test_unforced_levels_all_safe(self):
        p = _params(0.0)
        for xi in (0.01, 0.1, 0.16):
            assert mapping_M(xi, p, delta=0.1, t_max_periods=20) == 0


class TestEffectiveThreshold:
    def test_reference_bracket(self):
        r = effective_threshold(0.012, OMEGA, epsilon=EPS, delta=DELTA)
        assert isinstance(r, ThresholdResult)
        assert not r.no_correction and not r.flagged
        # Bracket invariants, re-evaluated independently.
        p = _params(0.012)
        assert mapping_M(r.xi_star, p, delta=DELTA) == 0
        assert mapping_M(r.bracket_hi, p, delta=DELTA) == 1
        assert 0.0 < r.bracket_hi - r.xi_star <= EPS
        # xi* sits between the center energy and the barrier.
        assert critical_points(p).center.xi < r.xi_star < XI_BARRIER

    def test_iteration_bound(self):
        # Initial bracket width is 5*epsilon, so at most ceil(log2(5))
        # bisection steps are needed.
        r = effective_threshold(0.012, OMEGA, epsilon=EPS, delta=DELTA)
        assert r.iterations <= math.ceil(math.log2(5.0))

    def test_determinism(self):
        a = effective_threshold(0.012, OMEGA, epsilon=EPS, delta=DELTA)
        b = effective_threshold(0.012, OMEGA, epsilon=EPS, delta=DELTA)
        assert a == b

    def test_tiny_forcing_no_correction(self):
        r = effective_threshold(1e-7, OMEGA, epsilon=0.01, delta=0.1)
        assert r.no_correction
        assert r.iterations == 0
        assert r.xi_star == pytest.approx(XI_BARRIER, abs=1e-5)
        assert r.bracket_hi == r.xi_star

    def test_overstrong_forcing_rejected(self):
        # At F = 0.018 even the center level curve escapes.
        with pytest.raises(InconsistentCenterError):
            effective_threshold(0.018, OMEGA, epsilon=EPS, delta=DELTA)

    def test_invalid_tolerances(self):
        with pytest.raises(ValueError):
            effective_threshold(0.012, OMEGA, epsilon=0.0)
        with pytest.raises(ValueError):
            effective_threshold(0.012, OMEGA, delta=-0.1)

    def test_metadata_round_trip(self):
        r = effective_threshold(0.012, OMEGA, psi_used=0.0,
                                epsilon=EPS, delta=DELTA, t_max_periods=100)
        assert (r.F, r.omega, r.psi_used) == (0.012, OMEGA, 0.0)
        assert (r.epsilon, r.delta, r.t_max_periods) == (EPS, DELTA, 100)

    @pytest.mark.slow
    def test_delta_refinement_stability(self):
        # Halving the curve sampling step moves xi* by at most epsilon.
        a = effective_threshold(0.012, OMEGA, epsilon=0.001, delta=0.01)
        b = effective_threshold(0.012, OMEGA, epsilon=0.001, delta=0.005)
        assert abs(a.xi_star - b.xi_star) <= 2 * 0.001


class TestSweep:
    def test_results_and_failures(self):
        # 0.018 fails calibration (center already escapes); the sweep
        # records it and continues.
        out = threshold_sweep([0.004, 0.012, 0.018], OMEGA,
                              epsilon=EPS, delta=DELTA)
        assert isinstance(out, SweepOutcome)
        assert [r.F for r in out.results] == [0.004, 0.012]
        assert len(out.failures) == 1
        f, msg = out.failures[0]
        assert f == 0.018
        assert "InconsistentCenterError" in msg

    def test_threshold_decreases_with_forcing(self):
        out = threshold_sweep([0.004, 0.012], OMEGA, epsilon=EPS, delta=DELTA)
        stars = [r.xi_star for r in out.results]
        assert stars[0] >= stars[1]

    def test_monotone_grid_required(self):
        with pytest.raises(ValueError):
            threshold_sweep([0.01, 0.01], OMEGA)
        with pytest.raises(ValueError):
            threshold_sweep([0.02, 0.01], OMEGA)
