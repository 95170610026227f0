"""Piecewise envelope profiles, bump extrema, and constant selection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lvfront.model import SystemParams, critical_speed
from lvfront.envelopes import (
    CRITICAL_AD_EQ1,
    CRITICAL_AD_LT1,
    SUPERCRITICAL,
    EnvelopeSet,
    Piece,
    PiecewiseProfile,
    SelectionKnobs,
    build_envelopes,
    bump_extrema,
    bump_log_max,
    gbump_extrema,
    join_point,
    min_decay_rate,
    select_critical,
    select_supercritical,
)

P = SystemParams(1.0, 0.5, 0.5, 1.0)


def build(p=P, s=3.0, knobs=SelectionKnobs()):
    ep = select_supercritical(p, s, knobs)
    return build_envelopes(p, s, ep)


class TestBumpExtrema:
    @given(coef=st.floats(0.1, 3.0), lam=st.floats(0.1, 2.0),
           mu=st.floats(1.05, 1.95), qf=st.floats(1.1, 10.0))
    @settings(max_examples=60)
    def test_closed_forms_match_grid_scan(self, coef, lam, mu, qf):
        q = qf * coef
        xi0, xiM, fmax = bump_extrema(coef, lam, mu, q)
        f = lambda x: coef * np.exp(lam * x) - q * np.exp(mu * lam * x)
        assert xiM < xi0 < 0.0
        assert abs(f(xi0)) < 1e-12 * max(1.0, fmax)
        xs = np.linspace(xi0 - 50.0 / lam, xi0, 20001)
        assert fmax >= f(xs).max() - 1e-9 * max(fmax, 1e-300)
        assert f(xiM) == pytest.approx(fmax, rel=1e-10)

    def test_log_max_consistent(self):
        _, _, fmax = bump_extrema(1.0, 0.5, 1.5, 3.0)
        assert bump_log_max(1.0, 0.5, 1.5, 3.0) == pytest.approx(math.log(fmax), rel=1e-12)

    def test_log_max_survives_underflow(self):
        # mu barely above 1 drives the max below double-precision range
        lg = bump_log_max(1.0, 0.2344, 1.001, 2.6)
        assert lg < -900.0  # exp(lg) underflows to 0.0 in double precision
        assert math.isfinite(lg)

    def test_requires_interior_zero(self):
        with pytest.raises(ValueError, match="no interior zero"):
            bump_extrema(1.0, 0.5, 1.5, 0.9)


class TestGBump:
    @given(h=st.floats(0.5, 10.0), qf=st.floats(1.1, 5.0),
           lam=st.floats(0.3, 2.0))
    @settings(max_examples=40)
    def test_zero_and_max(self, h, qf, lam):
        q = qf * h
        xi0, xiM, gmax = gbump_extrema(h, q, lam)
        g = lambda x: (h * (-x) - q * np.sqrt(-x)) * np.exp(lam * x)
        assert xi0 == pytest.approx(-((q / h) ** 2), rel=1e-12)
        assert xiM < xi0
        assert abs(g(xi0)) < 1e-10
        xs = np.linspace(xi0 - 40.0 / lam, xi0 - 1e-9, 20001)
        assert gmax >= g(xs).max() - 1e-9 * max(gmax, 1e-300)
        assert gmax > 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gbump_extrema(-1.0, 1.0, 1.0)


class TestJoinPoint:
    def test_value_matches_delta(self):
        coef, lam, mu, q = 1.0, 0.5, 1.5, 3.0
        xi0, xiM, fmax = bump_extrema(coef, lam, mu, q)
        f = lambda x: coef * math.exp(lam * x) - q * math.exp(mu * lam * x)
        xi = join_point(f, 0.3 * fmax, (xiM, xi0))
        assert xiM < xi < xi0
        assert abs(f(xi) - 0.3 * fmax) <= 1e-12

    def test_delta_above_maximum_rejected(self):
        coef, lam, mu, q = 1.0, 0.5, 1.5, 3.0
        xi0, xiM, fmax = bump_extrema(coef, lam, mu, q)
        f = lambda x: coef * math.exp(lam * x) - q * math.exp(mu * lam * x)
        with pytest.raises(ValueError, match="delta above envelope maximum"):
            join_point(f, 2.0 * fmax, (xiM, xi0))


class TestPiecewiseProfile:
    def test_must_tile_real_line(self):
        with pytest.raises(ValueError, match="tile the real line"):
            PiecewiseProfile((Piece(0.0, math.inf, "constant", {"c0": 1.0}),))
        with pytest.raises(ValueError, match="tile the real line"):
            PiecewiseProfile((
                Piece(-math.inf, 0.0, "constant", {"c0": 1.0}),
                Piece(1.0, math.inf, "constant", {"c0": 2.0}),
            ))

    def test_scalar_and_vector_evaluation(self):
        env = build()
        x = np.linspace(-20.0, 10.0, 101)
        vec = env.u_upper(x)
        for i in (0, 50, 100):
            assert env.u_upper(float(x[i])) == vec[i]

    def test_shift_translates_values_and_joins(self):
        env = build()
        sh = env.u_upper.shifted(3.0)
        x = np.linspace(-15.0, 15.0, 301)
        assert np.allclose(sh(x), env.u_upper(x - 3.0), atol=1e-14)
        assert sh.join_points == tuple(j + 3.0 for j in env.u_upper.join_points)

    def test_one_sided_requires_join(self):
        env = build()
        with pytest.raises(ValueError, match="not a join point"):
            env.u_upper.one_sided(5.0)


@pytest.mark.parametrize("p,s,case", [
    (P, 3.0, SUPERCRITICAL),
    (P, 2.0, CRITICAL_AD_EQ1),
    (SystemParams(0.5, 0.25, 1.0, 1.0), 2.0, CRITICAL_AD_LT1),
])
class TestBuiltEnvelopes:
    def _env(self, p, s):
        if abs(s - critical_speed(p)) <= 1e-9:
            return build_envelopes(p, s, select_critical(p))
        return build_envelopes(p, s, select_supercritical(p, s))

    def test_case_tag(self, p, s, case):
        assert self._env(p, s).case == case

    def test_continuity(self, p, s, case):
        env = self._env(p, s)
        for prof in (env.u_upper, env.u_lower, env.v_upper, env.v_lower):
            assert max(prof.continuity_defects()) <= 1e-10

    def test_ordering_and_positivity(self, p, s, case):
        env = self._env(p, s)
        lam = min_decay_rate(env)
        x = np.linspace(min(env.join_points) - 30.0 / lam, 25.0, 4001)
        assert np.all(env.u_lower(x) <= env.u_upper(x) + 1e-12)
        assert np.all(env.v_lower(x) <= env.v_upper(x) + 1e-12)
        assert np.all(env.u_upper(x) > 0.0)
        assert np.all(env.v_upper(x) > 0.0)

    def test_derivatives_match_finite_differences(self, p, s, case):
        env = self._env(p, s)
        h = 1e-6
        for prof in (env.u_upper, env.u_lower, env.v_upper, env.v_lower):
            joins = np.array(prof.join_points)
            x = np.linspace(min(env.join_points) - 25.0, 20.0, 1501)
            x = x[np.min(np.abs(x[:, None] - joins[None, :]), axis=1) > 0.05]
            fd1 = (prof(x + h) - prof(x - h)) / (2.0 * h)
            fd2 = (prof(x + h) - 2.0 * prof(x) + prof(x - h)) / (h * h)
            assert np.abs(prof(x, 1) - fd1).max() < 1e-5
            assert np.abs(prof(x, 2) - fd2).max() < 1e-3


class TestSelection:
    def test_margins_positive(self):
        ep = select_supercritical(P, 3.0)
        for name, val in ep.margins.items():
            assert val > 0.0, name

    def test_subcritical_rejected(self):
        with pytest.raises(ValueError, match="subcritical"):
            select_supercritical(P, 1.5)

    def test_out_of_regime_rejected(self):
        with pytest.raises(ValueError, match="unsupported regime"):
            select_supercritical(SystemParams(1.0, 2.0, 2.0, 1.0), 3.0)

    def test_mu_override_validated(self):
        with pytest.raises(ValueError, match="mu outside admissible interval"):
            select_supercritical(P, 3.0, SelectionKnobs(mu1=5.0))

    def test_q_override_validated(self):
        with pytest.raises(ValueError, match="q below its selection floor"):
            select_supercritical(P, 3.0, SelectionKnobs(q1=0.5))

    def test_nonmonotone_knobs_raise_lower_maximum(self):
        ep_d = select_supercritical(P, 4.5)
        ep_n = select_supercritical(P, 4.5, SelectionKnobs(nonmonotone_v=True))
        _, _, fmax_d = bump_extrema(P.a, 0.2344, ep_d.mu2, ep_d.q2)
        _, _, fmax_n = bump_extrema(P.a, 0.2344, ep_n.mu2, ep_n.q2)
        assert fmax_n > fmax_d

    def test_critical_requires_small_product(self):
        with pytest.raises(ValueError, match="apply species swap"):
            select_critical(SystemParams(2.0, 0.5, 0.25, 1.0))

    def test_critical_constants(self):
        # a = d = 1: slope constant h = (1/2) e^2 at lam-hat = 1
        ep = select_critical(P)
        assert ep.h1 == pytest.approx(0.5 * math.e ** 2, rel=1e-12)
        assert ep.h2 == pytest.approx(ep.h1, rel=1e-12)
        assert ep.qhat1 > 0.0 and ep.qhat2 > 0.0

    @given(s=st.floats(2.1, 8.0), theta=st.floats(0.05, 0.95))
    @settings(max_examples=30)
    def test_selection_feasible_across_speeds(self, s, theta):
        ep = select_supercritical(P, s, SelectionKnobs(theta_mu=theta))
        env = build_envelopes(P, s, ep)
        assert env.case == SUPERCRITICAL


class TestEnvelopeSet:
    def test_shift_moves_all_joins(self):
        env = build()
        sh = env.shifted(2.5)
        assert isinstance(sh, EnvelopeSet)
        assert sh.join_points == tuple(j + 2.5 for j in env.join_points)

    def test_tail_decay_rates(self):
        env = build()
        x = -30.0
        lam1 = math.log(env.u_upper(x + 1.0) / env.u_upper(x))
        assert lam1 == pytest.approx((3.0 - math.sqrt(5.0)) / 2.0, rel=1e-9)
