"""Shape classification, overshoot criteria, alarms, and the Sturm interval."""

import math

import numpy as np
import pytest

from lvfront.model import SystemParams, critical_speed, decay_rates, equilibria
from lvfront.envelopes import (
    Piece,
    PiecewiseProfile,
    SelectionKnobs,
    bump_extrema,
)
from lvfront.certify import select_and_build
from lvfront.solve import Profile
from lvfront.analyze import (
    classify,
    interior_box_implies_monotone,
    ma_front_criterion,
    nonmonotone_condition_u,
    nonmonotone_condition_v,
    oscillation_coupling,
    scan_region,
    sturm_interval,
)

P = SystemParams(1.0, 0.5, 0.5, 1.0)


def synthetic_profile(u, v, grid=None, converged=True, p=P, s=3.0):
    if grid is None:
        grid = np.linspace(-40.0, 40.0, u.size)
    return Profile(grid=grid, u=u, v=v, speed=s, params=p,
                   residual=0.0, converged=converged)


class TestClassify:
    def test_monotone_both(self):
        g = np.linspace(-40.0, 40.0, 2001)
        u = 0.5 * (1.0 + np.tanh(0.3 * g))
        prof = synthetic_profile(u, 0.6 * u, grid=g)
        assert classify(prof).tag == "MonotoneBoth"

    def test_single_overshoot_in_v(self):
        g = np.linspace(-40.0, 40.0, 2001)
        u = 0.5 * (1.0 + np.tanh(0.3 * g))
        v = 0.4 * (1.0 + np.tanh(0.3 * g)) + 0.1 * np.exp(-((g - 15.0) / 2.0) ** 2)
        prof = synthetic_profile(u, v, grid=g)
        shape = classify(prof)
        assert shape.tag == "NonMonotoneV"
        assert any(e.kind == "max" and e.component == "v" for e in shape.extrema)

    def test_ripple_below_prominence_ignored(self):
        g = np.linspace(-40.0, 40.0, 2001)
        u = 0.5 * (1.0 + np.tanh(0.3 * g)) + 1e-9 * np.sin(g)
        prof = synthetic_profile(u, 0.6 * (1.0 + np.tanh(0.3 * g)), grid=g)
        assert classify(prof).tag == "MonotoneBoth"

    def test_requires_convergence(self):
        g = np.linspace(-40.0, 40.0, 101)
        prof = synthetic_profile(np.linspace(0, 1, 101),
                                 np.linspace(0, 0.5, 101), grid=g,
                                 converged=False)
        with pytest.raises(ValueError, match="converged profile"):
            classify(prof)


class TestBoxAlarm:
    def test_vacuous_outside_box(self):
        g = np.linspace(-40.0, 40.0, 1001)
        u = np.full(1001, 1.5)  # above u*: hypothesis void
        check = interior_box_implies_monotone(synthetic_profile(u, 0.1 * u, grid=g), P)
        assert not check.hypothesis_holds
        assert check.passed

    def test_in_box_monotone_passes(self):
        ustar, vstar = equilibria(P).coexistence
        g = np.linspace(-40.0, 40.0, 2001)
        u = 0.98 * ustar * (0.5 * (1.0 + np.tanh(0.3 * g))) + 1e-6
        v = 0.98 * vstar * (0.5 * (1.0 + np.tanh(0.3 * g))) + 1e-6
        check = interior_box_implies_monotone(synthetic_profile(u, v, grid=g), P)
        assert check.hypothesis_holds
        assert check.passed


class TestOscillationCoupling:
    def test_both_quiet(self):
        g = np.linspace(-40.0, 40.0, 2001)
        u = 0.5 * (1.0 + np.tanh(0.3 * g))
        check = oscillation_coupling(synthetic_profile(u, 0.6 * u, grid=g))
        assert check.passed and not check.u_oscillates

    def test_single_component_ringing_flags(self):
        g = np.linspace(-40.0, 40.0, 4001)
        u = 0.5 * (1.0 + np.tanh(0.3 * g))
        v = 0.6 * u + 0.01 * np.sin(2.0 * g) * (g > 20.0)
        check = oscillation_coupling(synthetic_profile(u, v, grid=g))
        assert check.v_oscillates and not check.u_oscillates
        assert not check.passed


class TestOvershootCriterion:
    def test_remark_knobs_reproduce_threshold(self):
        knobs = SelectionKnobs(mu2=1.0 + 1.0 / 1.1, q2=2.6)
        for n in range(24, 40):
            p = SystemParams(1.0, 1.0 - 1.0 / n, 0.5, 1.0)
            assert nonmonotone_condition_v(p, 4.5, knobs).holds, n
        p23 = SystemParams(1.0, 1.0 - 1.0 / 23.0, 0.5, 1.0)
        assert not nonmonotone_condition_v(p23, 4.5, knobs).holds

    def test_fmax_reported(self):
        knobs = SelectionKnobs(mu2=1.0 + 1.0 / 1.1, q2=2.6)
        cond = nonmonotone_condition_v(SystemParams(1.0, 25.0 / 26.0, 0.5, 1.0),
                                       4.5, knobs)
        assert cond.fmax == pytest.approx(0.0817, abs=5e-4)
        assert cond.star == pytest.approx(2.0 / 27.0, abs=1e-12)
        assert cond.log_fmax == pytest.approx(math.log(cond.fmax), rel=1e-12)

    def test_u_side_mirrors(self):
        cond = nonmonotone_condition_u(P, 4.5)
        assert cond.star == equilibria(P).coexistence[0]

    def test_subcritical_rejected(self):
        with pytest.raises(ValueError, match="subcritical"):
            nonmonotone_condition_v(P, 1.0)

    def test_out_of_regime_rejected(self):
        with pytest.raises(ValueError, match="unsupported regime"):
            nonmonotone_condition_v(SystemParams(1.0, 2.0, 2.0, 1.0), 3.0)

    def test_critical_speed_branch_evaluates(self):
        cond = nonmonotone_condition_v(P, critical_speed(P))
        assert math.isfinite(cond.log_fmax) or cond.log_fmax == -math.inf
        assert cond.star > 0.0


class TestScanRegion:
    def test_holds_monotone_in_gap(self):
        knobs = SelectionKnobs(mu2=1.0 + 1.0 / 1.1, q2=2.6)
        gaps = np.linspace(0.01, 0.2, 12)
        scan = scan_region(P, [4.5], gaps, knobs)
        col = scan.holds[:, 0]
        # once the gap is too wide the criterion stays false
        assert all(not col[i + 1] or col[i] for i in range(len(col) - 1))
        assert col[0]          # tiny coexistence gap: overshoot wins
        assert not col[-1]     # wide gap: v* exceeds the envelope maximum

    def test_speed_clamped_to_critical(self):
        scan = scan_region(P, [0.5], [0.05])
        assert scan.holds.shape == (1, 1)  # evaluated at s* instead of failing

    def test_gap_wider_than_a_rejected(self):
        with pytest.raises(ValueError, match="b must stay positive"):
            scan_region(P, [3.0], [1.5])


class TestMaFrontCriterion:
    def test_holds_for_confined_envelopes(self):
        ustar, vstar = equilibria(P).coexistence
        lam = decay_rates(P, 3.0).lambda1

        def capped(coef):
            return PiecewiseProfile((
                Piece(-math.inf, 0.0, "exp", {"A": coef, "lam": lam}),
                Piece(0.0, math.inf, "constant", {"c0": coef}),
            ))

        env = select_and_build(P, 3.0)
        from dataclasses import replace
        confined = replace(env, u_upper=capped(ustar), u_lower=capped(0.9 * ustar),
                           v_upper=capped(vstar), v_lower=capped(0.9 * vstar))
        assert ma_front_criterion(confined, P)

    def test_fails_when_upper_exceeds_coexistence(self):
        env = select_and_build(P, 3.0)  # u_upper caps at 1 > u*
        assert not ma_front_criterion(env, P)


class TestSturmInterval:
    def test_closed_form_and_position(self):
        (xi1, xi2), M, _ = sturm_interval(P, 1.0, 0.5, 10.0)
        root = math.sqrt(0.5)
        assert M == 2
        assert xi1 == pytest.approx(-4.0 * math.pi / root, abs=1e-12)
        assert xi2 == pytest.approx(-3.0 * math.pi / root, abs=1e-12)
        assert xi2 - xi1 == pytest.approx(math.pi / root, abs=1e-12)
        assert xi2 < -10.0

    def test_interval_left_of_window(self):
        for L in (1.0, 5.0, 25.0, 100.0):
            (xi1, xi2), M, _ = sturm_interval(P, 1.0, 0.5, L)
            assert xi2 < -L
            assert (2 * M - 1) * math.pi / math.sqrt(0.5) > L

    def test_speed_guard(self):
        with pytest.raises(ValueError, match="subcritical speeds only"):
            sturm_interval(P, 2.5, 0.5, 10.0)

    def test_eps_guard(self):
        with pytest.raises(ValueError, match="eps"):
            sturm_interval(P, 1.0, 0.9, 10.0)  # needs eps < 1 - s^2/4 = 0.75

    def test_profile_potential_minimum(self):
        g = np.linspace(-60.0, 10.0, 7001)
        u = np.zeros_like(g)
        v = np.zeros_like(g)
        prof = synthetic_profile(u, v, grid=g, s=1.0)
        (_, _), _, psi_min = sturm_interval(P, 1.0, 0.5, 10.0, prof)
        assert psi_min == pytest.approx(1.0 - 0.25, abs=1e-12)
