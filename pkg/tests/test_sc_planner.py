import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_configs
from scpath.curvature_profile import SampledPath, VehicleLimits
from scpath.dubins import plan_dubins, sample_dubins
from scpath.geometry import Configuration, normalize_angle, transform_config
from scpath.precompute import SegmentCache
from scpath.sc_planner import (
    NoPathError,
    enumerate_candidates,
    first_minimum,
    plan_sc_path,
    validate_path,
    validate_samples,
)

LIMITS = VehicleLimits()


@pytest.fixture(scope="module")
def queries():
    rng = np.random.default_rng(99)
    return random_configs(rng, 40, LIMITS.kappa_max)


class TestSelection:
    def test_is_first_argmin_of_enumeration(self, queries):
        for qs, qg in queries:
            path = plan_sc_path(qs, qg, LIMITS)
            cands = enumerate_candidates(qs, qg, LIMITS)
            lengths = [math.inf if c is None else c.total_length for c in cands]
            k = first_minimum(lengths)
            assert path.total_length == pytest.approx(lengths[k], abs=1e-9)
            assert path.word == cands[k].word

    def test_forward_only_never_reverses(self, queries):
        for qs, qg in queries[:10]:
            path = plan_sc_path(qs, qg, LIMITS, directions="forward")
            assert "-" not in path.word
            assert np.all(path.samples.direction == 1)

    def test_frame_invariance(self, queries):
        rng = np.random.default_rng(5)
        for qs, qg in queries[:15]:
            rot = float(rng.uniform(-math.pi, math.pi))
            t = tuple(rng.uniform(-100, 100, 2))
            a = plan_sc_path(qs, qg, LIMITS).total_length
            b = plan_sc_path(transform_config(qs, rot, t), transform_config(qg, rot, t), LIMITS).total_length
            assert b == pytest.approx(a, abs=1e-6)

    def test_time_reversal_symmetry(self, queries):
        for qs, qg in queries[:15]:
            a = plan_sc_path(qs, qg, LIMITS).total_length
            b = plan_sc_path(qg.reversed(), qs.reversed(), LIMITS).total_length
            assert b == pytest.approx(a, abs=1e-9)

    def test_never_shorter_than_dubins(self, queries):
        rho = 1.0 / LIMITS.kappa_max
        for qs, qg in queries:
            sc = plan_sc_path(qs, qg, LIMITS, directions="forward").total_length
            assert sc >= plan_dubins(qs, qg, rho).total_length - 1e-6

    def test_nearly_collinear_length_approaches_dubins(self):
        # a small lateral offset: once the turns' minimum deflection drops below
        # the line's heading, the SC path hugs the Dubins path
        qs, qg = Configuration(0, 0, 0, 0), Configuration(60.0, 5.0, 0, 0)
        dubins = plan_dubins(qs, qg, 1.0 / LIMITS.kappa_max).total_length
        lengths = [plan_sc_path(qs, qg, LIMITS.scaled(k), directions="forward").total_length for k in (1, 8, 16, 32)]
        assert all(b <= a + 1e-9 for a, b in zip(lengths, lengths[1:]))
        assert lengths[-1] - dubins < 1e-3 * dubins

    def test_exactly_collinear_needs_a_loop(self):
        # every SC turn deflects by a positive minimum, so a forward turn-line-turn
        # path cannot end on the start's own line without looping
        d = 60.0
        qs, qg = Configuration(0, 0, 0, 0), Configuration(d, 0, 0, 0)
        loop = 2 * math.pi / LIMITS.kappa_max
        for k in (1, 16, 64):
            excess = plan_sc_path(qs, qg, LIMITS.scaled(k), directions="forward").total_length - d
            assert excess > loop


class TestInfeasible:
    def test_close_configurations_forward(self):
        with pytest.raises(NoPathError):
            plan_sc_path(Configuration(0, 0, 0, 0), Configuration(0.5, 0, 0, 0), LIMITS, directions="forward")
        cands = enumerate_candidates(Configuration(0, 0, 0, 0), Configuration(0.5, 0, 0, 0), LIMITS, directions="forward")
        assert all(c is None for c in cands)

    def test_bad_arguments(self):
        q = Configuration(0, 0, 0, 0)
        with pytest.raises(ValueError):
            plan_sc_path(q, Configuration(5, 5, 0, 1.0), LIMITS)
        with pytest.raises(ValueError):
            plan_sc_path(q, Configuration(50, 5, 0, 0), LIMITS, directions="sideways")


class TestValidation:
    def test_planner_output_is_clean(self, queries):
        for qs, qg in queries:
            path = plan_sc_path(qs, qg, LIMITS)
            report = validate_path(path, LIMITS)
            assert report.ok, report.violations
            # four spiral junctions at least: two inside each turn plus the line ends
            assert len(np.unique(path.samples.segment)) >= 4

    def test_curvature_step_is_flagged(self):
        s = np.linspace(0.0, 10.0, 1001)
        kappa = np.where(s <= 5.0, 0.0, 0.1)
        seg = (s > 5.0).astype(np.int64)
        smp = SampledPath(s, s, np.zeros_like(s), np.zeros_like(s), kappa, np.zeros_like(s), seg)
        report = validate_samples(smp, LIMITS)
        assert any("curvature discontinuity" in v for v in report.violations)

    def test_dubins_path_is_flagged(self):
        q0, q1 = Configuration(0, 0, 0), Configuration(30, 20, 1.0)
        smp = sample_dubins(plan_dubins(q0, q1, 1.0 / LIMITS.kappa_max))
        report = validate_samples(smp, LIMITS, q0, q1)
        assert any("curvature discontinuity" in v for v in report.violations)
        assert report.max_kappa_jump == pytest.approx(LIMITS.kappa_max, rel=1e-9)

    def test_endpoint_error_tracked(self, queries):
        qs, qg = queries[0]
        path = plan_sc_path(qs, qg, LIMITS)
        report = validate_samples(path.samples, LIMITS, qs, Configuration(qg.x + 0.01, qg.y, qg.theta, qg.kappa))
        assert any("position" in v for v in report.violations)

    def test_samples_and_segments_agree(self, queries):
        qs, qg = queries[1]
        path = plan_sc_path(qs, qg, LIMITS)
        assert sum(s.length for s in path.segments) == pytest.approx(path.total_length, abs=1e-9)
        assert path.samples.total_length == pytest.approx(path.total_length, abs=1e-9)
        end = path.samples.config(-1)
        assert abs(normalize_angle(end.theta - qg.theta)) < 1e-9


class TestCache:
    def test_cached_planner_identical(self):
        cache = SegmentCache.build(LIMITS, 11)
        rng = np.random.default_rng(8)
        for qs, qg in random_configs(rng, 30, LIMITS.kappa_max, curvatures=cache.curvatures):
            a = plan_sc_path(qs, qg, LIMITS)
            b = plan_sc_path(qs, qg, LIMITS, cache=cache)
            assert a.word == b.word
            assert abs(a.total_length - b.total_length) <= 1e-9

    def test_off_set_curvature_still_planned(self):
        cache = SegmentCache.build(LIMITS, 3)
        qs, qg = Configuration(0, 0, 0, 0.031), Configuration(40, 10, 1.0, -0.02)
        assert plan_sc_path(qs, qg, LIMITS, cache=cache).total_length == pytest.approx(
            plan_sc_path(qs, qg, LIMITS).total_length, abs=1e-9
        )

    def test_incompatible_cache_rejected(self):
        cache = SegmentCache.build(LIMITS, 3)
        q = Configuration(0, 0, 0, 0)
        with pytest.raises(ValueError):
            plan_sc_path(q, Configuration(40, 0, 0, 0), VehicleLimits(speed=3.0), cache=cache)
        with pytest.raises(ValueError):
            plan_sc_path(q, Configuration(40, 0, 0, 0), LIMITS, step=0.02, cache=cache)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-50, 50), st.floats(-50, 50), st.floats(-math.pi, math.pi),
    st.floats(-1, 1), st.floats(-1, 1),
)
def test_property_valid_paths(x, y, th, u, w):
    qs = Configuration(0.0, 0.0, 0.0, u * LIMITS.kappa_max)
    qg = Configuration(x, y, th, w * LIMITS.kappa_max)
    path = plan_sc_path(qs, qg, LIMITS)
    assert validate_path(path, LIMITS).ok
