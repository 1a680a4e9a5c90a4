"""Closed-loop tracking of steering references by a car with a limited steering actuator.

Two references share one scenario geometry (straight, turn, straight):

* a CC-style reference whose steering angle ramps linearly at the rate limit,
  which needs unbounded steering acceleration at the ramp corners;
* an SC reference whose steering follows the cubic-curvature transitions.

The vehicle is a kinematic single-track model. A PID loop drives steering
torque toward the commanded angle; the command is the reference angle at the
closest path point, optionally corrected by lateral and heading error.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .curvature_profile import DEFAULT_STEP, SampledPath, VehicleLimits
from .geometry import Configuration, Handedness, Travel
from .sc_turn import Piece, build_sc_turn, join_pieces, turn_pieces

TRACE_COLUMNS = ("t", "x", "y", "theta", "phi", "phi_dot", "phi_cmd", "e_lat", "e_head", "a_lat", "jerk")
SETTLE_THRESHOLD = 0.05
# samples per metre of reference path
REFERENCE_STEP = 0.01


@dataclass(frozen=True)
class ActuatorState:
    """Steering angle and rate plus the actuator's hard limits."""

    phi_max: float
    phi_dot_max: float
    phi_ddot_max: float
    torque_to_accel_gain: float = 1.0
    torque_max: float = 2.0
    phi: float = 0.0
    phi_dot: float = 0.0

    def __post_init__(self):
        for name in ("phi_max", "phi_dot_max", "phi_ddot_max", "torque_to_accel_gain", "torque_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"actuator {name} must be positive")
        if abs(self.phi) > self.phi_max or abs(self.phi_dot) > self.phi_dot_max:
            raise ValueError("initial actuator state violates its limits")

    @classmethod
    def from_limits(cls, limits: VehicleLimits, **kw) -> "ActuatorState":
        return cls(limits.phi_max, limits.phi_dot_max, limits.phi_ddot_max, **kw)


@dataclass(frozen=True)
class ControllerConfig:
    kp: float = 16.0
    ki: float = 0.0
    kd: float = 8.0
    k_lat: float = 0.25
    k_head: float = 1.5
    anti_windup_limit: float = 2.0

    def __post_init__(self):
        for name in ("kp", "ki", "kd", "k_lat", "k_head", "anti_windup_limit"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"controller gain {name} must be finite")
        if not self.kp > 0:
            raise ValueError("kp must be positive")

    @classmethod
    def critically_damped(cls, omega_n: float, gain: float, **kw) -> "ControllerConfig":
        """PD gains giving the actuator alone a critically damped step response.

        With angle acceleration ``gain * torque`` and torque
        ``kp * e + kd * de/dt`` the closed actuator loop is
        ``s^2 + gain*kd*s + gain*kp``; matching ``(s + omega_n)^2`` gives
        ``kp = omega_n^2 / gain`` and ``kd = 2 omega_n / gain``.
        """
        return cls(kp=omega_n**2 / gain, kd=2.0 * omega_n / gain, **kw)


@dataclass(frozen=True)
class Scenario:
    """Straight, turn at maximum curvature, straight; driven at ``limits.speed``."""

    straight_1: float = 12.775
    turn_angle: float = 0.5 * math.pi
    straight_2: float = 30.0
    dt: float = 0.01
    divergence_bound: float = 5.0


@dataclass(frozen=True)
class SteeringReference:
    """A path with the steering angle that drives it, also indexed by time at ``speed``."""

    kind: str
    path: SampledPath
    phi: np.ndarray
    speed: float
    turn_start: float

    @property
    def t(self) -> np.ndarray:
        return self.path.s / self.speed

    def steering_derivatives(self) -> Tuple[np.ndarray, np.ndarray]:
        """Finite-difference rate and acceleration of the reference angle in time."""
        t = self.t
        rate = np.gradient(self.phi, t)
        return rate, np.gradient(rate, t)


def _integrate_curvature(s, kappa, q0: Configuration) -> SampledPath:
    """Pose along a curvature series, trapezoidal heading and midpoint position."""
    ds = np.diff(s)
    theta = q0.theta + np.concatenate([[0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1]) * ds)])
    tm = 0.5 * (theta[1:] + theta[:-1])
    x = q0.x + np.concatenate([[0.0], np.cumsum(ds * np.cos(tm))])
    y = q0.y + np.concatenate([[0.0], np.cumsum(ds * np.sin(tm))])
    alpha = np.gradient(kappa, s) if len(s) > 2 else np.zeros_like(s)
    return SampledPath(s, x, y, theta, kappa, alpha)


def _ramp_angle(limits: VehicleLimits, phi_peak: float) -> float:
    """Heading gained over one linear steering ramp from 0 to ``phi_peak``."""
    # v/L * integral of tan(phi_dot_max t) dt
    return limits.speed / (limits.wheelbase * limits.phi_dot_max) * -math.log(math.cos(phi_peak))


def cc_reference_profile(
    straight_1: float, turn_angle: float, straight_2: float, limits: VehicleLimits, step: float = REFERENCE_STEP
) -> SteeringReference:
    """Trapezoidal steering: ramp at the rate limit, hold, ramp back.

    The hold lasts just long enough to turn through ``turn_angle``. Turns too
    small to reach the steering limit use a triangular profile instead.
    """
    if turn_angle < 0 or straight_1 < 0 or straight_2 < 0:
        raise ValueError("scenario lengths and turn angle must be non-negative")
    v, L, rate = limits.speed, limits.wheelbase, limits.phi_dot_max
    phi_peak = limits.phi_max
    full_ramps = 2.0 * _ramp_angle(limits, phi_peak)
    if turn_angle < full_ramps:
        # solve 2 * ramp(phi) = turn_angle for the peak angle
        phi_peak = math.acos(math.exp(-0.5 * turn_angle * L * rate / v))
        t_hold = 0.0
    else:
        t_hold = (turn_angle - full_ramps) / (v * limits.kappa_max)
    t_ramp = phi_peak / rate
    t1 = straight_1 / v
    t_turn = 2.0 * t_ramp + t_hold
    total = straight_1 + v * t_turn + straight_2
    n = max(2, math.ceil(total / step - 1e-9) + 1)
    s = np.linspace(0.0, total, n)
    t = s / v - t1
    phi = np.clip(np.minimum(t, t_turn - t) * rate, 0.0, phi_peak)
    if turn_angle == 0.0:
        phi[:] = 0.0
    kappa = np.tan(phi) / L
    path = _integrate_curvature(s, kappa, Configuration(0.0, 0.0, 0.0))
    return SteeringReference("cc", path, phi, v, straight_1)


def sc_reference_profile(
    straight_1: float, turn_angle: float, straight_2: float, limits: VehicleLimits, step: float = DEFAULT_STEP
) -> SteeringReference:
    """Line, left SC turn through ``turn_angle``, line, sampled at ``step``."""
    if straight_1 < 0 or straight_2 < 0:
        raise ValueError("scenario lengths must be non-negative")
    q_turn = Configuration(straight_1, 0.0, 0.0)
    turn = build_sc_turn(q_turn, Handedness.LEFT, Travel.FORWARD, limits, step=step)
    min_angle = turn.entry.end[2] + turn.exit.end[2]
    if turn_angle < min_angle - 1e-12:
        raise ValueError(f"turn angle {turn_angle:.4g} is below the SC turn's minimum {min_angle:.4g}")
    q_exit = turn.omega.config_at_heading(turn_angle)
    pieces = turn_pieces(turn, q_exit, step)
    s1 = np.linspace(0.0, straight_1, max(1, math.ceil(straight_1 / step - 1e-9)) + 1)
    s2 = np.linspace(0.0, straight_2, max(1, math.ceil(straight_2 / step - 1e-9)) + 1)

    def line(s, q):
        z = np.zeros_like(s)
        return Piece("line", float(s[-1]), 1, s, q.x + s * math.cos(q.theta), q.y + s * math.sin(q.theta),
                     np.full_like(s, q.theta), z, z.copy(), {})

    parts = ([line(s1, Configuration(0.0, 0.0, 0.0))] if straight_1 > 0 else []) + pieces
    if straight_2 > 0:
        parts.append(line(s2, q_exit))
    path = join_pieces(parts)
    phi = np.arctan(path.kappa * limits.wheelbase)
    return SteeringReference("sc", path, phi, limits.speed, straight_1)


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    phi_cmd: np.ndarray
    e_lat: np.ndarray
    e_head: np.ndarray
    a_lat: np.ndarray
    jerk: np.ndarray
    s_ref: np.ndarray = field(repr=False)
    dt: float = 0.0
    diverged: bool = False
    completed: bool = False

    def __len__(self):
        return len(self.t)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        table = np.column_stack([getattr(self, c) for c in TRACE_COLUMNS])
        np.savetxt(buf, table, delimiter=",", fmt="%.17g")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def kernel_inputs(
    reference: SteeringReference,
    actuator: ActuatorState,
    controller: ControllerConfig,
    v: float,
    dt: float,
    duration: Optional[float] = None,
    feedback_enabled: bool = True,
    wheelbase: float = 4.0,
    divergence_bound: float = 5.0,
) -> tuple:
    """Flat argument tuple for the simulation kernel."""
    if not (dt > 0 and v > 0):
        raise ValueError("dt and v must be positive")
    path = reference.path
    if len(path) < 2:
        raise ValueError("reference path needs at least two samples")
    if duration is None:
        duration = path.total_length / v + 1.0
    n_steps = int(math.ceil(duration / dt - 1e-9))
    q0 = path.config(0)
    state0 = np.array([q0.x, q0.y, q0.theta, actuator.phi, actuator.phi_dot])
    params = np.array(
        [
            dt, v, wheelbase, actuator.phi_max, actuator.phi_dot_max, actuator.phi_ddot_max,
            actuator.torque_to_accel_gain, actuator.torque_max,
            controller.kp, controller.ki, controller.kd, controller.k_lat, controller.k_head,
            controller.anti_windup_limit, 1.0 if feedback_enabled else 0.0, divergence_bound,
        ]
    )
    return (
        np.ascontiguousarray(path.x), np.ascontiguousarray(path.y), np.ascontiguousarray(path.theta),
        np.ascontiguousarray(reference.phi, dtype=float), state0, params, n_steps,
    )


def simulate_tracking(
    reference: SteeringReference,
    actuator: ActuatorState,
    controller: ControllerConfig,
    v: Optional[float] = None,
    dt: float = 0.01,
    duration: Optional[float] = None,
    feedback_enabled: bool = True,
    wheelbase: float = 4.0,
    divergence_bound: float = 5.0,
) -> SimTrace:
    """Drive along ``reference`` from its first pose.

    The run stops at ``duration``, when the vehicle passes the path's end, or
    when ``|e_lat|`` exceeds ``divergence_bound`` (the trace is then marked
    diverged).
    """
    v = reference.speed if v is None else v
    path = reference.path
    args = kernel_inputs(reference, actuator, controller, v, dt, duration, feedback_enabled, wheelbase, divergence_bound)
    out, rows, status = _kernels.simulate(*args)
    out = out[:rows]
    a_lat = v * v * np.tan(out[:, 4]) / wheelbase
    jerk = np.zeros_like(a_lat)
    jerk[1:] = np.diff(a_lat) / dt
    s_ref = np.interp(out[:, 9], np.arange(len(path.s)), path.s)
    return SimTrace(
        out[:, 0], out[:, 1], out[:, 2], out[:, 3], out[:, 4], out[:, 5], out[:, 6], out[:, 7], out[:, 8],
        a_lat, jerk, s_ref, dt, status == 2, status == 1,
    )


@dataclass(frozen=True)
class TrackingSummary:
    max_e_lat: float
    max_e_head: float
    settled: bool
    max_jerk: float


def tracking_errors(trace: SimTrace, path: SampledPath, threshold: float = SETTLE_THRESHOLD) -> TrackingSummary:
    """Error maxima after the initial straight, and whether the run settled.

    Settled means the run did not diverge and the last 10% of samples all have
    ``|e_lat| < threshold``.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    curved = np.flatnonzero(np.abs(path.kappa) > 0.0)
    s_turn = path.s[curved[0]] if len(curved) else path.s[-1]
    mask = trace.s_ref >= s_turn
    if not mask.any():
        mask = np.ones(len(trace), dtype=bool)
    tail = max(1, int(math.ceil(0.1 * len(trace))))
    settled = (not trace.diverged) and bool(np.all(np.abs(trace.e_lat[-tail:]) < threshold))
    return TrackingSummary(
        float(np.max(np.abs(trace.e_lat[mask]))),
        float(np.max(np.abs(trace.e_head[mask]))),
        settled,
        float(np.max(np.abs(trace.jerk))),
    )


# ---------------------------------------------------------------------------
# scenario configuration files

CONFIG_SECTIONS = {
    "vehicle": ("wheelbase", "phi_max", "phi_dot_max", "phi_ddot_max", "speed"),
    "actuator": ("torque_to_accel_gain", "torque_max"),
    "controller": ("kp", "ki", "kd", "k_lat", "k_head", "anti_windup_limit"),
    "scenario": ("straight_1", "turn_angle", "straight_2", "dt", "divergence_bound"),
}


class ConfigError(ValueError):
    """A scenario file does not follow the schema; ``path`` names the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SimConfig:
    limits: VehicleLimits
    actuator: ActuatorState
    controller: ControllerConfig
    scenario: Scenario

    @classmethod
    def from_dict(cls, data) -> "SimConfig":
        if not isinstance(data, dict):
            raise ConfigError("$", "expected an object")
        values = {}
        for section, keys in CONFIG_SECTIONS.items():
            if section not in data:
                raise ConfigError(section, "missing section")
            body = data[section]
            if not isinstance(body, dict):
                raise ConfigError(section, "expected an object")
            unknown = sorted(set(body) - set(keys))
            if unknown:
                raise ConfigError(f"{section}.{unknown[0]}", "unknown field")
            for key in keys:
                if key not in body:
                    raise ConfigError(f"{section}.{key}", "missing field")
                val = body[key]
                if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                    raise ConfigError(f"{section}.{key}", "expected a finite number")
                values[(section, key)] = float(val)
        unknown = sorted(set(data) - set(CONFIG_SECTIONS))
        if unknown:
            raise ConfigError(unknown[0], "unknown section")

        def sect(name):
            return {k: values[(name, k)] for k in CONFIG_SECTIONS[name]}

        try:
            limits = VehicleLimits(**sect("vehicle"))
        except ValueError as exc:
            raise ConfigError("vehicle", str(exc)) from None
        try:
            actuator = ActuatorState.from_limits(limits, **sect("actuator"))
        except ValueError as exc:
            raise ConfigError("actuator", str(exc)) from None
        try:
            controller = ControllerConfig(**sect("controller"))
        except ValueError as exc:
            raise ConfigError("controller", str(exc)) from None
        sc = sect("scenario")
        if not sc["dt"] > 0:
            raise ConfigError("scenario.dt", "must be positive")
        return cls(limits, actuator, controller, Scenario(**sc))

    def to_dict(self) -> dict:
        lim = self.limits
        return {
            "vehicle": {k: getattr(lim, k) for k in CONFIG_SECTIONS["vehicle"]},
            "actuator": {k: getattr(self.actuator, k) for k in CONFIG_SECTIONS["actuator"]},
            "controller": asdict(self.controller),
            "scenario": asdict(self.scenario),
        }


def load_config(path=None) -> SimConfig:
    """Read a scenario file; without a path, the packaged default."""
    if path is None:
        text = resources.files("scpath").joinpath("data/default_scenario.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return SimConfig.from_dict(data)


@dataclass(frozen=True)
class ComparisonResult:
    cc_reference: SteeringReference
    sc_reference: SteeringReference
    cc_trace: SimTrace
    sc_trace: SimTrace
    cc_summary: TrackingSummary
    sc_summary: TrackingSummary


def run_comparison(config: SimConfig, feedback_enabled: bool = True, dt: Optional[float] = None) -> ComparisonResult:
    """Track the CC and the SC reference of one scenario under the same controller."""
    sc = config.scenario
    dt = sc.dt if dt is None else dt
    refs = (
        cc_reference_profile(sc.straight_1, sc.turn_angle, sc.straight_2, config.limits),
        sc_reference_profile(sc.straight_1, sc.turn_angle, sc.straight_2, config.limits),
    )
    traces = [
        simulate_tracking(
            ref, config.actuator, config.controller, dt=dt, feedback_enabled=feedback_enabled,
            wheelbase=config.limits.wheelbase, divergence_bound=sc.divergence_bound,
        )
        for ref in refs
    ]
    summaries = [tracking_errors(tr, ref.path) for tr, ref in zip(traces, refs)]
    return ComparisonResult(refs[0], refs[1], traces[0], traces[1], summaries[0], summaries[1])
