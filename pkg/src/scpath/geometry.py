"""Planar configurations, rigid motions and tangents between turn circles."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from ._kernels import INSIDE_TOL, TWO_PI  # noqa: F401


def normalize_angle(theta: float) -> float:
    """Wrap ``theta`` into (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def normalize_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`normalize_angle`."""
    r = np.remainder(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi
    return np.where(r <= -math.pi, r + TWO_PI, r)


class Handedness(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> int:
        return 1 if self is Handedness.LEFT else -1

    def flipped(self) -> "Handedness":
        return Handedness.RIGHT if self is Handedness.LEFT else Handedness.LEFT


class Travel(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    @property
    def sign(self) -> int:
        return 1 if self is Travel.FORWARD else -1

    def flipped(self) -> "Travel":
        return Travel.BACKWARD if self is Travel.FORWARD else Travel.FORWARD


@dataclass(frozen=True)
class Configuration:
    """Pose plus curvature. ``theta`` is kept in (-pi, pi]."""

    x: float
    y: float
    theta: float
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"configuration {name} must be finite")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def reversed(self) -> "Configuration":
        """Same point driven the other way: heading flipped, curvature negated."""
        return Configuration(self.x, self.y, self.theta + math.pi, -self.kappa)

    def mirrored(self) -> "Configuration":
        """Reflection across the x axis."""
        return Configuration(self.x, -self.y, -self.theta, -self.kappa)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x, self.y, self.theta, self.kappa)


def transform_config(q: Configuration, rotation: float, translation: Tuple[float, float]) -> Configuration:
    """Rotate ``q`` about the origin by ``rotation`` then translate it."""
    c = math.cos(rotation)
    s = math.sin(rotation)
    return Configuration(
        c * q.x - s * q.y + translation[0],
        s * q.x + c * q.y + translation[1],
        q.theta + rotation,
        q.kappa,
    )


def inverse_transform_config(q: Configuration, rotation: float, translation: Tuple[float, float]) -> Configuration:
    """Undo :func:`transform_config` with the same arguments."""
    dx = q.x - translation[0]
    dy = q.y - translation[1]
    c = math.cos(rotation)
    s = math.sin(rotation)
    return Configuration(c * dx + s * dy, -s * dx + c * dy, q.theta - rotation, q.kappa)


def omega_heading_offset(handedness_sign: int, travel_sign: int, mu: float, entry: bool) -> float:
    """Vehicle heading minus polar angle for points on an omega circle."""
    # an entry circle is the exit circle of the time-reversed turn,
    # which keeps its steering but drives the other way
    travel = -travel_sign if entry else travel_sign
    beta = handedness_sign * travel * (0.5 * math.pi - mu)
    if travel < 0:
        beta += math.pi
    return beta


@dataclass(frozen=True)
class OmegaCircle:
    """Locus of the configurations where an SC turn meets a line segment.

    ``handedness`` and ``travel`` describe the turn as it is actually driven.
    With ``entry=False`` the circle holds the turn's exit configurations (the
    line starts there); with ``entry=True`` it holds the configurations where a
    line hands over into the turn. A point at polar angle ``psi`` about the
    center carries heading ``psi + heading_offset``.
    """

    center_x: float
    center_y: float
    radius: float
    mu: float
    handedness: Handedness = Handedness.LEFT
    travel: Travel = Travel.FORWARD
    entry: bool = False

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("omega circle radius must be positive")

    @property
    def center(self) -> Tuple[float, float]:
        return (self.center_x, self.center_y)

    @property
    def sense(self) -> int:
        """+1 when the turn sweeps counter-clockwise in the plane."""
        return self.handedness.sign * self.travel.sign

    @property
    def heading_offset(self) -> float:
        return omega_heading_offset(self.handedness.sign, self.travel.sign, self.mu, self.entry)

    def config_at_heading(self, theta: float) -> Configuration:
        """The zero-curvature configuration on the circle with vehicle heading ``theta``."""
        psi = theta - self.heading_offset
        return Configuration(
            self.center_x + self.radius * math.cos(psi),
            self.center_y + self.radius * math.sin(psi),
            theta,
            0.0,
        )

    def residuals(self, q: Configuration) -> Tuple[float, float]:
        """(radial distance error, heading error) of ``q`` against this circle."""
        dx = q.x - self.center_x
        dy = q.y - self.center_y
        radial = math.hypot(dx, dy) - self.radius
        heading = normalize_angle(q.theta - math.atan2(dy, dx) - self.heading_offset)
        return radial, heading

    def transformed(self, rotation: float, translation: Tuple[float, float]) -> "OmegaCircle":
        c = math.cos(rotation)
        s = math.sin(rotation)
        return OmegaCircle(
            c * self.center_x - s * self.center_y + translation[0],
            s * self.center_x + c * self.center_y + translation[1],
            self.radius,
            self.mu,
            self.handedness,
            self.travel,
            self.entry,
        )


def tangent_kind(circle_a: OmegaCircle, circle_b: OmegaCircle) -> str:
    """'external' when both turns sweep the same way, 'internal' otherwise."""
    return "external" if circle_a.sense == circle_b.sense else "internal"


def circle_tangent_configs(
    circle_a: OmegaCircle,
    circle_b: OmegaCircle,
    kind: Optional[str] = None,
    root: int = 1,
) -> Optional[Tuple[Configuration, Configuration]]:
    """Find the line that leaves ``circle_a`` and enters ``circle_b``.

    Returns ``(q_a, q_b)`` with equal headings, ``q_a`` on ``circle_a`` and
    ``q_b`` on ``circle_b``, both on one line of that inclination, or ``None``
    when no such line exists or a tangent point falls inside the other circle.

    The construction works in an auxiliary frame where ``circle_a`` sits at the
    origin and the line is horizontal; the offset of the second center across
    the line follows from the two radii and heading offsets, its along-line
    offset from the center distance. ``root=+1`` keeps the second center ahead
    of the first along the direction the first turn travels; ``root=-1`` picks
    the mirrored solution.
    """
    if circle_a.entry or not circle_b.entry:
        raise ValueError("circle_a must be an exit circle and circle_b an entry circle")
    if root not in (1, -1):
        raise ValueError("root must be +1 or -1")
    if kind is not None and kind != tangent_kind(circle_a, circle_b):
        raise ValueError(f"{kind!r} tangent requested for a {tangent_kind(circle_a, circle_b)} circle pair")

    ok, xa, ya, xb, yb, theta = _kernels.tangent(
        circle_a.center_x, circle_a.center_y, circle_a.radius, circle_a.heading_offset, circle_a.travel.sign,
        circle_b.center_x, circle_b.center_y, circle_b.radius, circle_b.heading_offset, float(root),
    )
    if not ok:
        return None
    return Configuration(xa, ya, theta, 0.0), Configuration(xb, yb, theta, 0.0)
