"""Cubic-curvature transition segments and the sampled-path container."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import _kernels
from .geometry import Configuration

DEFAULT_STEP = 0.01
# grid used to measure steering peaks; fixed in normalized arc length so peaks
# scale exactly with the segment length
PROFILE_SAMPLES = 257
LIMIT_TOL = 1e-3


class SteeringLimitError(RuntimeError):
    """Length scaling did not bring the steering peaks under the limits."""


@dataclass(frozen=True)
class VehicleLimits:
    """Steering actuator limits plus the speed at which they are checked."""

    wheelbase: float = 4.0
    phi_max: float = 0.5
    phi_dot_max: float = 0.4
    phi_ddot_max: float = 0.8
    speed: float = 2.0

    def __post_init__(self):
        for name in ("wheelbase", "phi_max", "phi_dot_max", "phi_ddot_max", "speed"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.phi_max >= 0.5 * math.pi:
            raise ValueError("phi_max must be below pi/2")

    @cached_property
    def kappa_max(self) -> float:
        return math.tan(self.phi_max) / self.wheelbase

    def scaled(self, factor: float) -> "VehicleLimits":
        """Limits whose attainable sharpness is ``factor`` times larger.

        Rate scales linearly and acceleration quadratically, so both the rate-
        and the acceleration-bound transition lengths shrink by ``factor``.
        """
        return VehicleLimits(
            self.wheelbase,
            self.phi_max,
            self.phi_dot_max * factor,
            self.phi_ddot_max * factor * factor,
            self.speed,
        )

    @cached_property
    def _fingerprint(self) -> str:
        return "|".join(float(getattr(self, n)).hex() for n in ("wheelbase", "phi_max", "phi_dot_max", "phi_ddot_max", "speed"))

    def fingerprint(self) -> str:
        """Exact identity of the limits, used to key caches."""
        return self._fingerprint


@dataclass(frozen=True)
class CubicCurvatureSegment:
    """kappa(s) = a0 + a1 s + a2 s^2 + a3 s^3 on [0, s_f]."""

    a0: float
    a1: float
    a2: float
    a3: float
    s_f: float
    theta_0: float = 0.0

    def kappa(self, s):
        return self.a0 + s * (self.a1 + s * (self.a2 + s * self.a3))

    def alpha(self, s):
        return self.a1 + s * (2.0 * self.a2 + s * 3.0 * self.a3)

    def theta(self, s):
        return self.theta_0 + s * (self.a0 + s * (self.a1 / 2.0 + s * (self.a2 / 3.0 + s * (self.a3 / 4.0))))

    @property
    def coefficients(self):
        return (self.a0, self.a1, self.a2, self.a3)


# boundary conditions in normalized arc length u = s/s_f, unknowns b_k = a_k s_f^k
_BOUNDARY_MATRIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 2.0, 3.0],
    ]
)


def solve_cubic_coefficients(kappa_i, alpha_i, kappa_f, alpha_f, s_f, theta_0=0.0) -> CubicCurvatureSegment:
    """Cubic matching curvature and sharpness at both ends of a segment of length ``s_f``."""
    if not (s_f > 0.0 and math.isfinite(s_f)):
        raise ValueError(f"segment length must be positive, got {s_f!r}")
    rhs = np.array([kappa_i, alpha_i * s_f, kappa_f, alpha_f * s_f], dtype=float)
    b = np.linalg.solve(_BOUNDARY_MATRIX, rhs)
    return CubicCurvatureSegment(
        float(b[0]), float(b[1]) / s_f, float(b[2]) / s_f**2, float(b[3]) / s_f**3, float(s_f), theta_0
    )


def eval_profile(seg: CubicCurvatureSegment, s: float):
    """(kappa, alpha, theta) at arc length ``s``."""
    if not (-1e-12 <= s <= seg.s_f + 1e-12):
        raise ValueError(f"s={s} outside [0, {seg.s_f}]")
    return seg.kappa(s), seg.alpha(s), seg.theta(s)


@dataclass(frozen=True)
class SteeringProfile:
    s: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    phi_ddot: np.ndarray

    @property
    def phi_dot_peak(self) -> float:
        return float(np.max(np.abs(self.phi_dot)))

    @property
    def phi_ddot_peak(self) -> float:
        return float(np.max(np.abs(self.phi_ddot)))


def steering_kinematics(seg: CubicCurvatureSegment, limits: VehicleLimits, n_samples: int = PROFILE_SAMPLES) -> SteeringProfile:
    """Steering angle, rate and acceleration along ``seg`` driven at ``limits.speed``.

    The rate follows analytically from the sharpness; the acceleration is a
    second-order finite difference of the rate over the grid.
    """
    if seg.s_f == 0.0:
        z = np.zeros(1)
        return SteeringProfile(z, np.array([math.atan(seg.a0 * limits.wheelbase)]), z.copy(), z.copy())
    s = np.linspace(0.0, seg.s_f, n_samples)
    phi, phi_dot, phi_ddot = _kernels.steering_series(
        seg.a0, seg.a1, seg.a2, seg.a3, s, limits.wheelbase, limits.speed
    )
    return SteeringProfile(s, phi, phi_dot, phi_ddot)


def initial_length(kappa_i: float, kappa_f: float, limits: VehicleLimits) -> float:
    """Small-angle estimate of the shortest admissible transition length."""
    dk = abs(kappa_f - kappa_i)
    # phi_dot ~ v L alpha, peak alpha = 1.5 dk / s_f; phi_ddot ~ v^2 L 6 dk / s_f^2
    s_rate = 1.5 * limits.speed * limits.wheelbase * dk / limits.phi_dot_max
    s_acc = math.sqrt(6.0 * limits.speed**2 * limits.wheelbase * dk / limits.phi_ddot_max)
    return max(s_rate, s_acc, 1e-6)


def enforce_steering_limits(
    kappa_i: float,
    kappa_f: float,
    limits: VehicleLimits,
    s_f_initial: Optional[float] = None,
    max_iter: int = 20,
) -> CubicCurvatureSegment:
    """Sharpness-continuous transition from ``kappa_i`` to ``kappa_f`` within the steering limits.

    The length starts at ``s_f_initial`` and is stretched by the larger of
    ``phi_dot_peak / phi_dot_max`` and ``sqrt(phi_ddot_peak / phi_ddot_max)``
    until both peaks sit within ``LIMIT_TOL`` of their limits. Equal end
    curvatures give a zero-length segment.

    Without ``s_f_initial`` the start is half the small-angle estimate, short
    enough that the first stretch lands on the binding limit.
    """
    kmax = limits.kappa_max
    if abs(kappa_i) > kmax * (1 + 1e-12) or abs(kappa_f) > kmax * (1 + 1e-12):
        raise ValueError("transition end curvatures must not exceed kappa_max")
    if kappa_i == kappa_f:
        return CubicCurvatureSegment(kappa_i, 0.0, 0.0, 0.0, 0.0)
    s_f = 0.5 * initial_length(kappa_i, kappa_f, limits) if s_f_initial is None else float(s_f_initial)
    for _ in range(max_iter):
        seg = solve_cubic_coefficients(kappa_i, 0.0, kappa_f, 0.0, s_f)
        prof = steering_kinematics(seg, limits)
        factor = max(prof.phi_dot_peak / limits.phi_dot_max, math.sqrt(prof.phi_ddot_peak / limits.phi_ddot_max))
        if factor <= 1.0 + LIMIT_TOL:
            return seg
        s_f *= factor
    raise SteeringLimitError(
        f"transition {kappa_i:g} -> {kappa_f:g} still violates limits after {max_iter} rescalings"
    )


@dataclass(frozen=True)
class SampledPath:
    """Arc-length samples of a path.

    ``segment`` tags each sample with the index of the path piece it belongs
    to (a junction sample belongs to the piece that ends there) and
    ``direction`` is +1 for forward and -1 for backward driving.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    alpha: np.ndarray
    segment: np.ndarray = field(default=None)
    direction: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.s)
        if self.segment is None:
            object.__setattr__(self, "segment", np.zeros(n, dtype=np.int64))
        if self.direction is None:
            object.__setattr__(self, "direction", np.ones(n, dtype=np.int64))

    def __len__(self):
        return len(self.s)

    @property
    def total_length(self) -> float:
        return float(self.s[-1] - self.s[0])

    def config(self, i: int) -> Configuration:
        return Configuration(float(self.x[i]), float(self.y[i]), float(self.theta[i]), float(self.kappa[i]))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("s,x,y,theta,kappa,alpha\n")
        table = np.column_stack([self.s, self.x, self.y, self.theta, self.kappa, self.alpha])
        np.savetxt(buf, table, delimiter=",", fmt="%.17g")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "SampledPath":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(*(data[:, i].copy() for i in range(6)))


def arc_grid(length: float, step: float) -> np.ndarray:
    """Uniform grid on [0, length] with spacing at most ``step`` and exact endpoints."""
    if length <= 0.0:
        return np.zeros(1)
    n = max(1, math.ceil(length / step - 1e-9))
    return np.linspace(0.0, length, n + 1)


def integrate_segment(seg: CubicCurvatureSegment, q_start: Configuration, step: float = DEFAULT_STEP) -> SampledPath:
    """Sample ``seg`` from ``q_start``: analytic heading, midpoint quadrature for position."""
    if not step > 0.0:
        raise ValueError("step must be positive")
    if abs(q_start.kappa - seg.a0) > 1e-9:
        raise ValueError(f"start curvature {q_start.kappa} does not match segment curvature {seg.a0}")
    s = arc_grid(seg.s_f, step)
    x, y, theta = _kernels.integrate_cubic(seg.a0, seg.a1, seg.a2, seg.a3, q_start.theta, q_start.x, q_start.y, s)
    return SampledPath(s, x, y, theta, seg.kappa(s), seg.alpha(s))


@dataclass(frozen=True)
class Transition:
    """A limit-compliant transition integrated from the canonical pose (0, 0, 0).

    ``end`` is the canonical end pose (x, y, theta); the sampled arrays are what
    turns splice in after a rigid motion.
    """

    kappa_from: float
    kappa_to: float
    segment: CubicCurvatureSegment
    samples: SampledPath

    @property
    def length(self) -> float:
        return self.segment.s_f

    @cached_property
    def end(self):
        return (float(self.samples.x[-1]), float(self.samples.y[-1]), float(self.samples.theta[-1]))


def build_transition(kappa_from: float, kappa_to: float, limits: VehicleLimits, step: float = DEFAULT_STEP) -> Transition:
    seg = enforce_steering_limits(kappa_from, kappa_to, limits)
    samples = integrate_segment(seg, Configuration(0.0, 0.0, 0.0, kappa_from), step)
    return Transition(kappa_from, kappa_to, seg, samples)
