"""Grid verification of envelope bracketing: signs, corners, ordering."""

import numpy as np
import pytest

from lvfront.model import SystemParams, critical_speed
from lvfront.certify import (
    EXCLUSION_RADIUS,
    RESIDUAL_TOL,
    certificate_to_json,
    certify,
    check_differential_inequalities,
    make_grid,
    select_and_build,
)

P = SystemParams(1.0, 0.5, 0.5, 1.0)


class TestCertify:
    @pytest.mark.parametrize("p,s,mode", [
        (P, 3.0, "default"),
        (P, 4.5, "nonmonotone-v"),
        (SystemParams(1.0, 25.0 / 26.0, 0.5, 1.0), 4.5, "nonmonotone-v"),
        (P, 2.0, "default"),
        (SystemParams(0.5, 0.25, 1.0, 1.0), 2.0, "default"),
    ])
    def test_passes_on_canonical_cases(self, p, s, mode):
        cert = certify(p, s, mode=mode)
        assert cert.passed
        assert cert.ordering_ok
        assert all(cc.ok for cc in cert.corner_checks)
        assert cert.min_margins["u_upper"] <= RESIDUAL_TOL
        assert cert.min_margins["u_lower"] >= -RESIDUAL_TOL

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="unknown mode"):
            certify(P, 3.0, mode="sideways")

    def test_subcritical_rejected(self):
        with pytest.raises(ValueError, match="complex linearization roots"):
            certify(P, 1.5)

    def test_out_of_regime_rejected(self):
        with pytest.raises(ValueError, match="unsupported regime"):
            certify(SystemParams(1.0, 2.0, 2.0, 1.0), 3.0)

    def test_refinement_does_not_flip(self):
        coarse = certify(P, 3.0, n_points=2001)
        fine = certify(P, 3.0, n_points=8001)
        assert coarse.passed and fine.passed

    def test_json_summary_shape(self):
        cert = certify(P, 3.0)
        payload = certificate_to_json(cert)
        assert payload["verdict"] == "pass"
        assert set(payload["min_margins"]) == {"u_upper", "u_lower",
                                               "v_upper", "v_lower"}
        assert payload["case"] == "Supercritical"


class TestGrid:
    def test_excludes_join_neighborhoods(self):
        env = select_and_build(P, 3.0)
        grid = make_grid(env, 5001)
        for j in env.join_points:
            assert np.abs(grid - j).min() > EXCLUSION_RADIUS
        assert np.all(np.diff(grid) > 0.0)

    def test_reaches_deep_left_tail(self):
        env = select_and_build(P, 3.0)
        grid = make_grid(env, 5001)
        assert grid[0] < min(env.join_points) - 30.0
        assert grid[-1] <= 30.0


class TestResiduals:
    def test_closed_form_matches_finite_differences(self):
        env = select_and_build(P, 3.0)
        grid = make_grid(env, 4001)
        # keep a wide berth of the joins so the FD stencil stays analytic
        joins = np.array(env.join_points)
        grid = grid[np.min(np.abs(grid[:, None] - joins[None, :]), axis=1) > 0.01]
        res = check_differential_inequalities(env, P, 3.0, grid)

        h = 1e-5
        a, b, c, d = P.a, P.b, P.c, P.d
        uu, ul = env.u_upper(grid), env.u_lower(grid)
        vu, vl = env.v_upper(grid), env.v_lower(grid)

        def fd2(prof):
            return (prof(grid + h) - 2.0 * prof(grid) + prof(grid - h)) / (h * h)

        def fd1(prof):
            return (prof(grid + h) - prof(grid - h)) / (2.0 * h)

        fd = {
            "u_upper": fd2(env.u_upper) - 3.0 * fd1(env.u_upper) + uu * (1 - uu - c * vl),
            "u_lower": fd2(env.u_lower) - 3.0 * fd1(env.u_lower) + ul * (1 - ul - c * vu),
            "v_upper": d * fd2(env.v_upper) - 3.0 * fd1(env.v_upper) + vu * (a - b * ul - vu),
            "v_lower": d * fd2(env.v_lower) - 3.0 * fd1(env.v_lower) + vl * (a - b * uu - vl),
        }
        for name in res:
            assert np.abs(res[name] - fd[name]).max() < 1e-5

    def test_upper_residuals_nonpositive_lower_nonnegative(self):
        for s in (2.0, 2.5, 4.5):
            cert = certify(P, s)
            assert cert.min_margins["u_upper"] <= RESIDUAL_TOL
            assert cert.min_margins["v_upper"] <= RESIDUAL_TOL
            assert cert.min_margins["u_lower"] >= -RESIDUAL_TOL
            assert cert.min_margins["v_lower"] >= -RESIDUAL_TOL


class TestSelectAndBuild:
    def test_critical_speed_detection(self):
        env = select_and_build(P, critical_speed(P))
        assert env.case == "CriticalAdEq1"
        env = select_and_build(P, critical_speed(P) + 0.5)
        assert env.case == "Supercritical"
