import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from scpath.curvature_profile import (
    CubicCurvatureSegment,
    SampledPath,
    VehicleLimits,
    build_transition,
    enforce_steering_limits,
    eval_profile,
    integrate_segment,
    solve_cubic_coefficients,
    steering_kinematics,
)
from scpath.geometry import Configuration
from scpath.sc_planner import junction_jumps

kappas = st.floats(-0.5, 0.5, allow_nan=False)
sharpness = st.floats(-0.2, 0.2, allow_nan=False)
lengths = st.floats(0.1, 50.0, allow_nan=False)


class TestVehicleLimits:
    def test_defaults(self):
        lim = VehicleLimits()
        assert lim.kappa_max == pytest.approx(math.tan(0.5) / 4.0)

    @pytest.mark.parametrize("field", ["wheelbase", "phi_max", "phi_dot_max", "phi_ddot_max", "speed"])
    def test_non_positive_rejected(self, field):
        with pytest.raises(ValueError, match=field):
            VehicleLimits(**{field: 0.0})

    def test_phi_max_below_right_angle(self):
        with pytest.raises(ValueError):
            VehicleLimits(phi_max=math.pi / 2)

    def test_scaled_shrinks_transition(self):
        lim = VehicleLimits()
        s1 = enforce_steering_limits(0.0, lim.kappa_max, lim).s_f
        s4 = enforce_steering_limits(0.0, lim.kappa_max, lim.scaled(4.0)).s_f
        assert s4 == pytest.approx(s1 / 4.0, rel=2e-3)

    def test_fingerprint_is_exact(self):
        assert VehicleLimits().fingerprint() == VehicleLimits().fingerprint()
        assert VehicleLimits().fingerprint() != VehicleLimits(speed=2.0 + 1e-15).fingerprint()


class TestCubicCoefficients:
    def test_constant_curvature(self):
        seg = solve_cubic_coefficients(0.07, 0.0, 0.07, 0.0, 3.3)
        assert seg.coefficients == pytest.approx((0.07, 0.0, 0.0, 0.0), abs=1e-15)

    def test_closed_form_example(self):
        seg = solve_cubic_coefficients(0.0, 0.0, 0.1, 0.0, 10.0)
        assert seg.coefficients == pytest.approx((0.0, 0.0, 3e-3, -2e-4), abs=1e-15)

    @given(kappas, sharpness, kappas, sharpness, lengths)
    def test_boundary_conditions_reproduced(self, ki, ai, kf, af, sf):
        seg = solve_cubic_coefficients(ki, ai, kf, af, sf)
        assert abs(seg.kappa(0.0) - ki) < 1e-10
        assert abs(seg.alpha(0.0) - ai) < 1e-10
        assert abs(seg.kappa(sf) - kf) < 1e-10
        assert abs(seg.alpha(sf) - af) < 1e-10

    @given(kappas, sharpness, kappas, sharpness, lengths)
    def test_matches_independent_solve(self, ki, ai, kf, af, sf):
        # unnormalized system in the raw coefficients
        m = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [1, sf, sf**2, sf**3], [0, 1, 2 * sf, 3 * sf**2]], dtype=float)
        ref = np.linalg.lstsq(m, np.array([ki, ai, kf, af]), rcond=None)[0]
        seg = solve_cubic_coefficients(ki, ai, kf, af, sf)
        scale = np.array([1.0, sf, sf**2, sf**3])
        np.testing.assert_allclose(np.array(seg.coefficients) * scale, ref * scale, atol=1e-9)

    def test_non_positive_length_rejected(self):
        with pytest.raises(ValueError):
            solve_cubic_coefficients(0, 0, 0.1, 0, 0.0)


class TestEvalProfile:
    seg = solve_cubic_coefficients(0.0, 0.0, 0.1, 0.0, 10.0)

    def test_start(self):
        assert eval_profile(self.seg, 0.0) == (self.seg.a0, self.seg.a1, self.seg.theta_0)

    def test_midpoint_sharpness(self):
        assert eval_profile(self.seg, 5.0)[1] == pytest.approx(0.015, abs=1e-15)

    def test_heading_at_end(self):
        assert eval_profile(self.seg, 10.0)[2] == pytest.approx(0.5, abs=1e-14)

    def test_heading_is_integral_of_curvature(self):
        s = 7.3
        ref, _ = quad(self.seg.kappa, 0.0, s)
        assert self.seg.theta(s) == pytest.approx(ref, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            eval_profile(self.seg, 10.5)


class TestSteeringKinematics:
    lim = VehicleLimits()

    def test_constant_curvature_is_still(self):
        prof = steering_kinematics(CubicCurvatureSegment(0.1, 0, 0, 0, 5.0), self.lim)
        assert prof.phi_dot_peak == 0.0 and prof.phi_ddot_peak == 0.0

    def test_rate_peak_at_midpoint_for_small_curvature(self):
        seg = solve_cubic_coefficients(0.0, 0.0, 1e-4, 0.0, 10.0)
        prof = steering_kinematics(seg, self.lim, n_samples=1001)
        assert prof.s[np.argmax(np.abs(prof.phi_dot))] == pytest.approx(5.0, abs=0.02)

    def test_rate_matches_chain_rule(self):
        seg = solve_cubic_coefficients(0.0, 0.0, 0.12, 0.0, 6.0)
        prof = steering_kinematics(seg, self.lim, n_samples=2001)
        L, v = self.lim.wheelbase, self.lim.speed
        ref = v * L * seg.alpha(prof.s) / (1 + (L * seg.kappa(prof.s)) ** 2)
        np.testing.assert_allclose(prof.phi_dot, ref, atol=1e-12)

    def test_grid_refinement(self):
        seg = solve_cubic_coefficients(0.0, 0.0, 0.13, 0.0, 4.0)
        a = steering_kinematics(seg, self.lim, n_samples=257).phi_ddot_peak
        b = steering_kinematics(seg, self.lim, n_samples=513).phi_ddot_peak
        assert abs(a - b) / b < 0.01


class TestEnforceLimits:
    def test_already_compliant_unchanged(self):
        lim = VehicleLimits()
        seg = enforce_steering_limits(0.0, 0.1, lim, s_f_initial=100.0)
        assert seg.s_f == 100.0

    def test_rate_bound_doubles_length(self):
        lim = VehicleLimits(phi_ddot_max=1e6)
        dk = 0.01
        s0 = 5.0
        peak = steering_kinematics(solve_cubic_coefficients(0, 0, dk, 0, s0), lim).phi_dot_peak
        lim = VehicleLimits(phi_dot_max=peak / 2.0, phi_ddot_max=1e6)
        seg = enforce_steering_limits(0.0, dk, lim, s_f_initial=s0)
        assert seg.s_f == pytest.approx(2 * s0, rel=0.01)
        assert steering_kinematics(seg, lim).phi_dot_peak == pytest.approx(lim.phi_dot_max, rel=0.01)

    def test_acceleration_bound_doubles_length(self):
        dk = 0.01
        s0 = 5.0
        probe = VehicleLimits(phi_dot_max=1e6)
        peak = steering_kinematics(solve_cubic_coefficients(0, 0, dk, 0, s0), probe).phi_ddot_peak
        lim = VehicleLimits(phi_dot_max=1e6, phi_ddot_max=peak / 4.0)
        seg = enforce_steering_limits(0.0, dk, lim, s_f_initial=s0)
        assert seg.s_f == pytest.approx(2 * s0, rel=0.01)

    def test_equal_curvatures_give_empty_segment(self):
        assert enforce_steering_limits(0.05, 0.05, VehicleLimits()).s_f == 0.0

    def test_default_transition_sits_on_binding_limit(self):
        lim = VehicleLimits()
        seg = enforce_steering_limits(0.0, lim.kappa_max, lim)
        prof = steering_kinematics(seg, lim)
        ratio = max(prof.phi_dot_peak / lim.phi_dot_max, prof.phi_ddot_peak / lim.phi_ddot_max)
        assert 0.99 < ratio <= 1.001

    def test_out_of_range_curvature(self):
        lim = VehicleLimits()
        with pytest.raises(ValueError):
            enforce_steering_limits(0.0, 2 * lim.kappa_max, lim)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1))
    def test_always_within_limits(self, u, w):
        lim = VehicleLimits()
        ki, kf = u * lim.kappa_max, w * lim.kappa_max
        seg = enforce_steering_limits(ki, kf, lim)
        if seg.s_f == 0:
            return
        prof = steering_kinematics(seg, lim)
        assert prof.phi_dot_peak <= lim.phi_dot_max * 1.001
        assert prof.phi_ddot_peak <= lim.phi_ddot_max * 1.001


class TestIntegration:
    def test_straight_line(self):
        smp = integrate_segment(CubicCurvatureSegment(0, 0, 0, 0, 10.0), Configuration(0, 0, 0, 0))
        assert smp.config(-1).as_tuple() == pytest.approx((10, 0, 0, 0), abs=1e-12)

    def test_quarter_circle(self):
        k = 0.2
        seg = CubicCurvatureSegment(k, 0, 0, 0, math.pi / k / 2)
        end = integrate_segment(seg, Configuration(0, 0, 0, k)).config(-1)
        assert end.as_tuple() == pytest.approx((5, 5, math.pi / 2, k), abs=1e-5)

    def test_second_order_convergence(self):
        seg = solve_cubic_coefficients(0.0, 0.0, 0.13, 0.0, 8.0)
        q0 = Configuration(0, 0, 0, 0)
        x_ref, _ = quad(lambda s: math.cos(seg.theta(s)), 0, seg.s_f, epsabs=1e-14)
        y_ref, _ = quad(lambda s: math.sin(seg.theta(s)), 0, seg.s_f, epsabs=1e-14)
        errs = []
        for h in (0.1, 0.05, 0.025):
            end = integrate_segment(seg, q0, h).config(-1)
            errs.append(math.hypot(end.x - x_ref, end.y - y_ref))
        assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5

    def test_curvature_mismatch_rejected(self):
        with pytest.raises(ValueError):
            integrate_segment(CubicCurvatureSegment(0.1, 0, 0, 0, 1.0), Configuration(0, 0, 0, 0))

    def test_join_at_zero_sharpness_is_continuous(self):
        a = solve_cubic_coefficients(0.0, 0.0, 0.1, 0.0, 4.0)
        b = solve_cubic_coefficients(0.1, 0.0, -0.05, 0.0, 3.0)
        pa = integrate_segment(a, Configuration(0, 0, 0, 0), 0.001)
        pb = integrate_segment(b, pa.config(-1), 0.001)
        joined = SampledPath(
            np.concatenate([pa.s, pa.s[-1] + pb.s[1:]]),
            np.concatenate([pa.x, pb.x[1:]]),
            np.concatenate([pa.y, pb.y[1:]]),
            np.concatenate([pa.theta, pb.theta[1:]]),
            np.concatenate([pa.kappa, pb.kappa[1:]]),
            np.concatenate([pa.alpha, pb.alpha[1:]]),
            np.concatenate([np.zeros(len(pa), dtype=np.int64), np.ones(len(pb) - 1, dtype=np.int64)]),
        )
        kj, aj = junction_jumps(joined)
        assert kj < 1e-9 and aj < 1e-9


class TestTransition:
    def test_canonical_start_and_end_curvature(self):
        lim = VehicleLimits()
        tr = build_transition(0.0, lim.kappa_max, lim)
        assert tr.samples.config(0).as_tuple() == (0.0, 0.0, 0.0, 0.0)
        assert tr.samples.kappa[-1] == pytest.approx(lim.kappa_max, abs=1e-12)
        assert tr.end == (tr.samples.x[-1], tr.samples.y[-1], tr.samples.theta[-1])

    def test_csv_round_trip(self, tmp_path):
        lim = VehicleLimits()
        smp = build_transition(0.0, 0.1, lim).samples
        smp.to_csv(tmp_path / "t.csv")
        back = SampledPath.from_csv(tmp_path / "t.csv")
        np.testing.assert_array_equal(back.x, smp.x)
        np.testing.assert_array_equal(back.alpha, smp.alpha)
