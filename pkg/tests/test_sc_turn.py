import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from scpath.curvature_profile import VehicleLimits
from scpath.geometry import Configuration, Handedness, Travel, normalize_angle, transform_config
from scpath.sc_planner import junction_jumps, steering_peaks
from scpath.sc_turn import arc_angle, build_sc_turn, realize_turn, turn_length, turn_pieces

LIMITS = VehicleLimits()


def _exit_at(turn, extra_heading):
    """Exit configuration reached after ``extra_heading`` of arc beyond the minimum."""
    th_min = turn.arc_start[2] + turn.exit.end[2]
    th = th_min + turn.sense * extra_heading
    if turn.travel is Travel.BACKWARD:
        th += math.pi
    return turn.omega.config_at_heading(th)


class TestOmegaCircle:
    def test_nearly_degenerate_exit(self):
        stiff = VehicleLimits(phi_dot_max=1e4, phi_ddot_max=1e8)
        turn = build_sc_turn(Configuration(0, 0, 0, 0), Handedness.LEFT, Travel.FORWARD, stiff)
        assert turn.omega.radius == pytest.approx(1 / stiff.kappa_max, abs=1e-4)
        assert turn.omega.mu == pytest.approx(0.0, abs=1e-4)

    def test_arc_center_from_entry_integration(self):
        lim = VehicleLimits(phi_max=math.atan(0.2 * 4.0))
        assert lim.kappa_max == pytest.approx(0.2)
        turn = build_sc_turn(Configuration(0, 0, 0, 0), Handedness.LEFT, Travel.FORWARD, lim)
        seg = turn.entry.segment
        x2, _ = quad(lambda s: math.cos(seg.theta(s)), 0, seg.s_f, epsabs=1e-13)
        y2, _ = quad(lambda s: math.sin(seg.theta(s)), 0, seg.s_f, epsabs=1e-13)
        th2 = seg.theta(seg.s_f)
        cx, cy = turn.arc_center
        assert cx == pytest.approx(x2 - 5 * math.sin(th2), abs=1e-6)
        assert cy == pytest.approx(y2 + 5 * math.cos(th2), abs=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(0.1, 1.2),
        st.floats(0.05, 5.0),
        st.floats(0.05, 5.0),
        st.floats(0.5, 10.0),
        st.floats(0.5, 20.0),
    )
    def test_omega_radius_exceeds_arc_radius(self, phi_max, rate, acc, wheelbase, speed):
        lim = VehicleLimits(wheelbase, phi_max, rate, acc, speed)
        turn = build_sc_turn(Configuration(0, 0, 0, 0), Handedness.LEFT, Travel.FORWARD, lim)
        assert turn.omega.radius > 1 / lim.kappa_max


class TestRealization:
    @pytest.mark.parametrize("h", list(Handedness))
    @pytest.mark.parametrize("d", list(Travel))
    def test_zero_arc(self, h, d):
        turn = build_sc_turn(Configuration(1, 2, 0.4, 0.03), h, d, LIMITS)
        q_exit = _exit_at(turn, 0.0)
        kinds = [p.kind for p in turn_pieces(turn, q_exit)]
        assert kinds == ["cubic", "cubic"]
        assert turn_length(turn, q_exit) == pytest.approx(turn.entry.length + turn.exit.length, abs=1e-9)

    def test_full_turn_periodicity(self):
        turn = build_sc_turn(Configuration(0, 0, 0, 0), Handedness.LEFT, Travel.FORWARD, LIMITS)
        a = _exit_at(turn, 0.8)
        b = _exit_at(turn, 0.8 + 2 * math.pi)
        assert a.as_tuple() == pytest.approx(b.as_tuple(), abs=1e-9)
        assert arc_angle(turn, a) == pytest.approx(arc_angle(turn, b), abs=1e-9)

    @pytest.mark.parametrize("h", list(Handedness))
    @pytest.mark.parametrize("d", list(Travel))
    def test_reaches_exit_with_continuous_profile(self, h, d):
        q0 = Configuration(-3, 4, 2.0, -0.05)
        turn = build_sc_turn(q0, h, d, LIMITS)
        q_exit = _exit_at(turn, 1.1)
        smp = realize_turn(turn, q_exit)
        first, last = smp.config(0), smp.config(-1)
        assert math.hypot(first.x - q0.x, first.y - q0.y) < 1e-12
        assert math.hypot(last.x - q_exit.x, last.y - q_exit.y) < 1e-6
        assert abs(normalize_angle(last.theta - q_exit.theta)) < 1e-9
        assert abs(last.kappa) < 1e-12
        assert first.kappa == pytest.approx(q0.kappa, abs=1e-12)
        kj, aj = junction_jumps(smp)
        assert kj < 1e-6 and aj < 1e-6
        pd, pdd = steering_peaks(smp, LIMITS)
        assert pd <= LIMITS.phi_dot_max * 1.001 and pdd <= LIMITS.phi_ddot_max * 1.001
        assert np.all(smp.direction == d.sign)

    def test_exit_off_circle_rejected(self):
        turn = build_sc_turn(Configuration(0, 0, 0, 0), Handedness.LEFT, Travel.FORWARD, LIMITS)
        with pytest.raises(ValueError, match="omega circle"):
            turn_pieces(turn, Configuration(100, 100, 0, 0))


class TestSymmetries:
    @settings(max_examples=25, deadline=None)
    @given(st.floats(-math.pi, math.pi), st.floats(-30, 30), st.floats(-30, 30))
    def test_rigid_motion_equivariance(self, rot, tx, ty):
        q = Configuration(1.0, -2.0, 0.3, 0.04)
        base = build_sc_turn(q, Handedness.RIGHT, Travel.FORWARD, LIMITS)
        moved = build_sc_turn(transform_config(q, rot, (tx, ty)), Handedness.RIGHT, Travel.FORWARD, LIMITS)
        expected = base.omega.transformed(rot, (tx, ty))
        assert moved.omega.center == pytest.approx(expected.center, abs=1e-9)
        assert moved.omega.radius == pytest.approx(expected.radius, abs=1e-12)

    def test_mirror_swaps_handedness(self):
        q = Configuration(2.0, 1.0, 0.5, 0.06)
        left = build_sc_turn(q, Handedness.LEFT, Travel.FORWARD, LIMITS)
        right = build_sc_turn(q.mirrored(), Handedness.RIGHT, Travel.FORWARD, LIMITS)
        assert right.omega.center == pytest.approx((left.omega.center_x, -left.omega.center_y), abs=1e-12)
        assert right.omega.radius == pytest.approx(left.omega.radius, abs=1e-12)

    def test_backward_turn_is_forward_turn_of_reversed_start(self):
        q = Configuration(2.0, 1.0, 0.5, 0.06)
        back = build_sc_turn(q, Handedness.LEFT, Travel.BACKWARD, LIMITS)
        fwd = build_sc_turn(q.reversed(), Handedness.RIGHT, Travel.FORWARD, LIMITS)
        # same geometry: driving backward with left steering sweeps clockwise
        assert back.sense == fwd.sense == -1
        assert back.omega.center == pytest.approx(fwd.omega.center, abs=1e-12)
        assert back.omega.radius == pytest.approx(fwd.omega.radius, abs=1e-12)

    def test_curvature_above_limit_rejected(self):
        with pytest.raises(ValueError):
            build_sc_turn(Configuration(0, 0, 0, 1.0), Handedness.LEFT, Travel.FORWARD, LIMITS)
