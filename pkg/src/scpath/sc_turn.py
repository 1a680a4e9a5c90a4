"""SC turns: cubic entry spiral, maximum-curvature arc, cubic exit spiral."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .curvature_profile import (
    DEFAULT_STEP,
    SampledPath,
    Transition,
    VehicleLimits,
    arc_grid,
    build_transition,
)
from .geometry import TWO_PI, Configuration, Handedness, OmegaCircle, Travel

TransitionSource = Callable[[float, float], Transition]

# q_exit must sit this close to the omega circle to be realizable
ON_CIRCLE_TOL = 1e-6


@dataclass(frozen=True)
class SCTurn:
    """One SC turn spanned from ``q1``.

    Internally the turn is stored as driven along its direction of travel: a
    backward turn is the forward turn of the reversed start configuration, so
    ``entry``/``exit`` curvatures, ``arc_start`` heading and ``sense`` are all
    in that travel frame. ``exit`` is canonical (departs from (0, 0, 0)).
    """

    q1: Configuration
    handedness: Handedness
    travel: Travel
    entry: Transition
    exit: Transition
    arc_start: Tuple[float, float, float]
    arc_center: Tuple[float, float]
    arc_radius: float
    omega: OmegaCircle

    @property
    def sense(self) -> int:
        return self.handedness.sign * self.travel.sign

    @property
    def entry_segment(self):
        return self.entry.segment

    @property
    def exit_segment(self):
        return self.exit.segment


def build_sc_turn(
    q_start: Configuration,
    handedness: Handedness,
    travel: Travel,
    limits: VehicleLimits,
    kappa_end: float = 0.0,
    step: float = DEFAULT_STEP,
    transitions: Optional[TransitionSource] = None,
) -> SCTurn:
    """Build the turn and its omega circle.

    ``transitions(kappa_from, kappa_to)`` supplies canonical transitions; by
    default they are built fresh, a :class:`~scpath.precompute.SegmentCache`
    passes its lookup instead.
    """
    handedness = Handedness(handedness)
    travel = Travel(travel)
    return assemble_turn(q_start, handedness, travel, *turn_parts(q_start, handedness, travel, limits, kappa_end, step, transitions))


def turn_parts(q_start, handedness, travel, limits, kappa_end=0.0, step=DEFAULT_STEP, transitions=None):
    """Transitions and plain-float geometry of a turn, without building objects.

    Returns ``(entry, exit, x2, y2, th2, cx, cy, radius, r, mu)``: the arc
    start pose, arc center, arc radius and omega radius and angle.
    """
    kmax = limits.kappa_max
    if abs(q_start.kappa) > kmax * (1 + 1e-12) or abs(kappa_end) > kmax * (1 + 1e-12):
        raise ValueError("turn end curvatures must not exceed kappa_max")
    if transitions is None:
        def transitions(kf, kt):
            return build_transition(kf, kt, limits, step)

    d = travel.sign
    sense = handedness.sign * d
    q1 = q_start if d > 0 else q_start.reversed()
    radius = 1.0 / kmax
    k_arc = sense * kmax

    entry = transitions(q1.kappa, k_arc)
    exit_ = transitions(k_arc, d * kappa_end)

    ex, ey, eth = entry.end
    c1 = math.cos(q1.theta)
    s1 = math.sin(q1.theta)
    x2 = q1.x + c1 * ex - s1 * ey
    y2 = q1.y + s1 * ex + c1 * ey
    th2 = q1.theta + eth
    cx = x2 - sense * radius * math.sin(th2)
    cy = y2 + sense * radius * math.cos(th2)

    x4, y4, th4 = exit_.end
    r = math.hypot(x4, y4 - sense * radius)
    mu = sense * (math.atan2(y4 - sense * radius, x4) - th4) + 0.5 * math.pi
    return entry, exit_, x2, y2, th2, cx, cy, radius, r, mu


def assemble_turn(q_start, handedness, travel, entry, exit_, x2, y2, th2, cx, cy, radius, r, mu) -> SCTurn:
    omega = OmegaCircle(cx, cy, r, mu, handedness, travel, entry=False)
    return SCTurn(q_start, handedness, travel, entry, exit_, (x2, y2, th2), (cx, cy), radius, omega)


def arc_angle(turn: SCTurn, q_exit: Configuration) -> float:
    """Swept arc angle in [0, 2 pi) that makes the turn end at ``q_exit``."""
    th_exit = q_exit.theta if turn.travel is Travel.FORWARD else q_exit.theta + math.pi
    th3 = th_exit - turn.exit.end[2]
    delta = (turn.sense * (th3 - turn.arc_start[2])) % TWO_PI
    if delta > TWO_PI - 1e-9:
        delta = 0.0
    return delta


def turn_length(turn: SCTurn, q_exit: Configuration) -> float:
    return turn.entry.length + arc_angle(turn, q_exit) * turn.arc_radius + turn.exit.length


@dataclass
class Piece:
    """One primitive of a realized path, sampled from its own start."""

    kind: str
    length: float
    direction: int
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    alpha: np.ndarray
    params: dict = field(default_factory=dict)

    def reversed(self) -> "Piece":
        """The same primitive traversed end to start (time reversal)."""
        params = dict(self.params)
        if "kappa_start" in params:
            params["kappa_start"], params["kappa_end"] = params["kappa_end"], params["kappa_start"]
        if self.kind == "cubic":
            a0, a1, a2, a3 = params["coefficients"]
            L = self.length
            params["coefficients"] = [
                a0 + L * (a1 + L * (a2 + L * a3)),
                -(a1 + L * (2 * a2 + 3 * a3 * L)),
                a2 + 3 * a3 * L,
                -a3,
            ]
        if self.kind == "arc":
            params["sweep"] = -params["sweep"]
        if self.kind == "line":
            params["start"], params["end"] = params["end"], params["start"]
        return Piece(
            self.kind,
            self.length,
            -self.direction,
            self.length - self.s[::-1],
            self.x[::-1].copy(),
            self.y[::-1].copy(),
            self.theta[::-1].copy(),
            self.kappa[::-1].copy(),
            -self.alpha[::-1],
            params,
        )


def _placed_transition(tr: Transition, x0, y0, th0, d: int) -> Piece:
    smp = tr.samples
    c = math.cos(th0)
    s = math.sin(th0)
    x = x0 + c * smp.x - s * smp.y
    y = y0 + s * smp.x + c * smp.y
    theta = smp.theta + th0
    if d < 0:
        theta = theta - math.pi
    seg = tr.segment
    params = {
        "kappa_start": d * tr.kappa_from,
        "kappa_end": d * tr.kappa_to,
        "coefficients": [d * seg.a0, d * seg.a1, d * seg.a2, d * seg.a3],
    }
    return Piece("cubic", tr.length, d, smp.s.copy(), x, y, theta, d * smp.kappa, d * smp.alpha, params)


def turn_pieces(turn: SCTurn, q_exit: Configuration, step: float = DEFAULT_STEP) -> List[Piece]:
    """Entry spiral, arc and exit spiral ending at ``q_exit``, zero-length pieces dropped."""
    rad, head = turn.omega.residuals(q_exit)
    if abs(rad) > ON_CIRCLE_TOL or abs(head) > ON_CIRCLE_TOL:
        raise ValueError(f"exit configuration is not on the turn's omega circle (radial {rad:.3g}, heading {head:.3g})")
    d = turn.travel.sign
    sense = turn.sense
    R = turn.arc_radius
    q1 = turn.q1 if d > 0 else turn.q1.reversed()
    pieces = []
    if turn.entry.length > 0.0:
        pieces.append(_placed_transition(turn.entry, q1.x, q1.y, q1.theta, d))

    x2, y2, th2 = turn.arc_start
    cx, cy = turn.arc_center
    delta = arc_angle(turn, q_exit)
    th3 = th2 + sense * delta
    if delta > 0.0:
        length = delta * R
        s = arc_grid(length, step)
        ang = th2 + sense * s / R
        x = cx + sense * R * np.sin(ang)
        y = cy - sense * R * np.cos(ang)
        theta = ang - math.pi if d < 0 else ang
        kappa = np.full_like(s, d * sense / R)
        params = {"center": [cx, cy], "radius": R, "kappa": d * sense / R, "sweep": sense * delta}
        pieces.append(Piece("arc", length, d, s, x, y, theta, kappa, np.zeros_like(s), params))
    x3 = cx + sense * R * math.sin(th3)
    y3 = cy - sense * R * math.cos(th3)
    if turn.exit.length > 0.0:
        pieces.append(_placed_transition(turn.exit, x3, y3, th3, d))
    return pieces


def join_pieces(pieces: List[Piece]) -> SampledPath:
    """Concatenate pieces into one sampled path; shared junction samples appear once."""
    cols = {k: [] for k in ("s", "x", "y", "theta", "kappa", "alpha", "segment", "direction")}
    offset = 0.0
    for i, p in enumerate(pieces):
        sl = slice(0, None) if i == 0 else slice(1, None)
        n = len(p.s[sl])
        cols["s"].append(offset + p.s[sl])
        for k in ("x", "y", "theta", "kappa", "alpha"):
            cols[k].append(getattr(p, k)[sl])
        cols["segment"].append(np.full(n, i, dtype=np.int64))
        cols["direction"].append(np.full(n, p.direction, dtype=np.int64))
        offset += p.length
    if not pieces:
        raise ValueError("nothing to join")
    return SampledPath(**{k: np.concatenate(v) for k, v in cols.items()})


def realize_turn(turn: SCTurn, q_exit: Configuration, step: float = DEFAULT_STEP) -> SampledPath:
    """Sample the turn from ``q1`` to ``q_exit``."""
    pieces = turn_pieces(turn, q_exit, step)
    if not pieces:
        q = turn.q1
        return SampledPath(*(np.array([v]) for v in (0.0, q.x, q.y, q.theta, q.kappa, 0.0)))
    return join_pieces(pieces)
