"""Shortest SC path between two configurations: turn, line, turn."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .curvature_profile import DEFAULT_STEP, LIMIT_TOL, SampledPath, VehicleLimits
from .dubins import DubinsPath, plan_dubins  # noqa: F401  (baseline re-exported here)
from . import _kernels
from .geometry import (
    Configuration,
    Handedness,
    OmegaCircle,
    Travel,
    circle_tangent_configs,
    normalize_angle,
    omega_heading_offset,
)
from .sc_turn import Piece, SCTurn, assemble_turn, build_sc_turn, join_pieces, turn_length, turn_parts, turn_pieces

POS_TOL = 1e-3
HEAD_TOL = 1e-4
CURV_TOL = 1e-6
JUMP_TOL = 1e-6
LINE_TOL = 1e-9

# enumeration order doubles as the tie-break order
VARIANTS: Tuple[Tuple[Handedness, Travel], ...] = (
    (Handedness.LEFT, Travel.FORWARD),
    (Handedness.RIGHT, Travel.FORWARD),
    (Handedness.LEFT, Travel.BACKWARD),
    (Handedness.RIGHT, Travel.BACKWARD),
)


class NoPathError(RuntimeError):
    """None of the candidate turn pairs can be joined by a line."""


def variant_label(handedness: Handedness, travel: Travel) -> str:
    return ("L" if handedness is Handedness.LEFT else "R") + ("+" if travel is Travel.FORWARD else "-")


def goal_circle(turn_g: SCTurn) -> OmegaCircle:
    """Entry circle of a goal turn built on the time-reversed problem."""
    return replace(turn_g.omega, travel=turn_g.travel.flipped(), entry=True)


@dataclass(frozen=True)
class Connection:
    q_a: Configuration
    q_b: Configuration
    line: float  # signed along the common heading; negative means driven backward
    total_length: float


def best_connection(turn_s: SCTurn, turn_g: SCTurn) -> Optional[Connection]:
    """Shortest admissible line between the two turns, or ``None``.

    When both turns drive the same way the line must be driven that way too.
    Otherwise the vehicle reverses at one end of the line, and both tangent
    solutions are tried.
    """
    circle_a = turn_s.omega
    circle_b = goal_circle(turn_g)
    same = circle_a.travel is circle_b.travel
    best = None
    for root in ((1,) if same else (1, -1)):
        pair = circle_tangent_configs(circle_a, circle_b, root=root)
        if pair is None:
            continue
        q_a, q_b = pair
        line = (q_b.x - q_a.x) * math.cos(q_a.theta) + (q_b.y - q_a.y) * math.sin(q_a.theta)
        if same and circle_a.travel.sign * line < -LINE_TOL:
            continue
        total = turn_length(turn_s, q_a) + abs(line) + turn_length(turn_g, q_b)
        if best is None or total < best.total_length - _kernels.TIE_TOL:
            best = Connection(q_a, q_b, line, total)
    return best


@dataclass(frozen=True)
class SegmentInfo:
    kind: str
    length: float
    params: dict


@dataclass(frozen=True)
class SCPath:
    """Turn, line, turn. Samples are produced on first access."""

    q_start: Configuration
    q_goal: Configuration
    word: str
    total_length: float
    turn_s: SCTurn = field(repr=False)
    turn_g: SCTurn = field(repr=False)
    connection: Connection = field(repr=False)
    step: float = DEFAULT_STEP

    @cached_property
    def pieces(self) -> List[Piece]:
        c = self.connection
        pieces = turn_pieces(self.turn_s, c.q_a, self.step)
        if abs(c.line) > 0.0:
            length = abs(c.line)
            s = np.linspace(0.0, length, max(1, math.ceil(length / self.step - 1e-9)) + 1)
            sign = 1 if c.line > 0 else -1
            ct = math.cos(c.q_a.theta)
            st = math.sin(c.q_a.theta)
            pieces.append(
                Piece(
                    "line",
                    length,
                    sign,
                    s,
                    c.q_a.x + sign * s * ct,
                    c.q_a.y + sign * s * st,
                    np.full_like(s, c.q_a.theta),
                    np.zeros_like(s),
                    np.zeros_like(s),
                    {"start": [c.q_a.x, c.q_a.y], "end": [c.q_b.x, c.q_b.y]},
                )
            )
        pieces.extend(p.reversed() for p in reversed(turn_pieces(self.turn_g, c.q_b, self.step)))
        return pieces

    @property
    def segments(self) -> List[SegmentInfo]:
        out = []
        for p in self.pieces:
            params = dict(p.params)
            params["direction"] = p.direction
            out.append(SegmentInfo(p.kind, p.length, params))
        return out

    @cached_property
    def samples(self) -> SampledPath:
        return join_pieces(self.pieces)


def _turns(q: Configuration, limits, step, transitions, goal: bool, directions: str) -> List[Optional[SCTurn]]:
    out = []
    for h, d in VARIANTS:
        if directions == "forward" and d is Travel.BACKWARD:
            out.append(None)
            continue
        # goal turns are built backwards in time from the goal
        travel = d.flipped() if goal else d
        out.append(build_sc_turn(q, h, travel, limits, 0.0, step, transitions))
    return out


def connect_turns(turn_s: SCTurn, turn_g: SCTurn, step: float = DEFAULT_STEP) -> Optional[SCPath]:
    """Join a start turn and a (time-reversed) goal turn with a line segment."""
    c = best_connection(turn_s, turn_g)
    if c is None:
        return None
    word = variant_label(turn_s.handedness, turn_s.travel) + "S" + variant_label(turn_g.handedness, turn_g.travel.flipped())
    return SCPath(turn_s.q1, turn_g.q1, word, c.total_length, turn_s, turn_g, c, step)



def _check_inputs(q_start, q_goal, limits, step, cache, directions):
    if directions not in ("both", "forward"):
        raise ValueError("directions must be 'both' or 'forward'")
    kmax = limits.kappa_max
    for q in (q_start, q_goal):
        if abs(q.kappa) > kmax * (1 + 1e-12):
            raise ValueError(f"|kappa|={abs(q.kappa)} exceeds kappa_max={kmax}")
    if cache is None:
        return None
    cache.check_compatible(limits, step)
    return cache.get


def enumerate_candidates(
    q_start: Configuration,
    q_goal: Configuration,
    limits: VehicleLimits,
    step: float = DEFAULT_STEP,
    cache=None,
    directions: str = "both",
) -> List[Optional[SCPath]]:
    """All 16 candidates in enumeration order, built as full objects.

    Infeasible candidates (and backward ones when ``directions='forward'``)
    are ``None``. :func:`plan_sc_path` scores the same candidates through a
    compiled kernel; this is the readable reference.
    """
    transitions = _check_inputs(q_start, q_goal, limits, step, cache, directions)
    starts = _turns(q_start, limits, step, transitions, False, directions)
    goals = _turns(q_goal, limits, step, transitions, True, directions)
    out = []
    for ts in starts:
        for tg in goals:
            out.append(None if ts is None or tg is None else connect_turns(ts, tg, step))
    return out


def _turn_rows(q, limits, step, transitions, goal, directions):
    rows = np.zeros((len(VARIANTS), _kernels.TURN_FIELDS))
    parts = [None] * len(VARIANTS)
    for idx, (h, d) in enumerate(VARIANTS):
        if directions == "forward" and d is Travel.BACKWARD:
            continue
        build = d.flipped() if goal else d
        p = turn_parts(q, h, build, limits, 0.0, step, transitions)
        entry, exit_, _, _, th2, cx, cy, radius, r, mu = p
        rows[idx] = (
            1.0,
            cx,
            cy,
            r,
            omega_heading_offset(h.sign, d.sign, mu, goal),
            d.sign,
            build.sign,
            h.sign * build.sign,
            th2,
            exit_.end[2],
            entry.length + exit_.length,
            radius,
        )
        parts[idx] = (h, build, p)
    return rows, parts


def first_minimum(lengths) -> int:
    """Index of the first entry within the tie tolerance of the minimum."""
    lengths = np.asarray(lengths, dtype=float)
    best = np.min(lengths)
    if not math.isfinite(best):
        return 0
    return int(np.flatnonzero(lengths <= best + _kernels.TIE_TOL)[0])


def plan_sc_path(
    q_start: Configuration,
    q_goal: Configuration,
    limits: VehicleLimits,
    step: float = DEFAULT_STEP,
    cache=None,
    directions: str = "both",
) -> SCPath:
    """Shortest feasible candidate; the first in enumeration order wins ties.

    With a :class:`~scpath.precompute.SegmentCache` the transitions come from
    the table instead of being built; the result is identical either way.
    """
    transitions = _check_inputs(q_start, q_goal, limits, step, cache, directions)
    s_rows, s_parts = _turn_rows(q_start, limits, step, transitions, False, directions)
    g_rows, g_parts = _turn_rows(q_goal, limits, step, transitions, True, directions)
    total, line, xa, ya, xb, yb, theta = _kernels.candidate_table(s_rows, g_rows)
    k = first_minimum(total)
    if not math.isfinite(total[k]):
        raise NoPathError("no SC path: configurations too close for a turn-line-turn connection")
    i, j = divmod(k, len(VARIANTS))
    hs, bs, ps = s_parts[i]
    hg, bg, pg = g_parts[j]
    turn_s = assemble_turn(q_start, hs, bs, *ps)
    turn_g = assemble_turn(q_goal, hg, bg, *pg)
    th = float(theta[k])
    conn = Connection(
        Configuration(float(xa[k]), float(ya[k]), th),
        Configuration(float(xb[k]), float(yb[k]), th),
        float(line[k]),
        float(total[k]),
    )
    word = variant_label(hs, bs) + "S" + variant_label(hg, bg.flipped())
    return SCPath(q_start, q_goal, word, conn.total_length, turn_s, turn_g, conn, step)


@dataclass(frozen=True)
class ValidationReport:
    max_abs_kappa: float
    phi_peak: float
    max_kappa_jump: float
    max_alpha_jump: float
    phi_dot_peak: float
    phi_ddot_peak: float
    position_error: float
    heading_error: float
    curvature_error: float
    violations: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "max_abs_kappa": self.max_abs_kappa,
            "phi_peak": self.phi_peak,
            "max_kappa_jump": self.max_kappa_jump,
            "max_alpha_jump": self.max_alpha_jump,
            "phi_dot_peak": self.phi_dot_peak,
            "phi_ddot_peak": self.phi_ddot_peak,
            "position_error": self.position_error,
            "heading_error": self.heading_error,
            "curvature_error": self.curvature_error,
            "violations": list(self.violations),
        }


def _right_limit(s, v, s_j):
    """Value at ``s_j`` extrapolated from the first (up to three) samples after it."""
    n = len(s)
    if n == 1:
        return float(v[0])
    deg = min(n - 1, 2)
    coef = np.polyfit(s[:3] - s_j, v[:3], deg)
    return float(coef[-1])


def junction_jumps(samples: SampledPath) -> Tuple[float, float]:
    """Largest curvature and sharpness discontinuity over all piece junctions.

    The left limit is the junction sample of the ending piece; the right limit
    is extrapolated from the next piece's own samples.
    """
    seg = samples.segment
    cuts = np.flatnonzero(np.diff(seg)) + 1
    kj = 0.0
    aj = 0.0
    bounds = list(cuts) + [len(seg)]
    for c, stop in zip(cuts, bounds[1:]):
        j = c - 1
        s = samples.s[c:stop]
        kj = max(kj, abs(samples.kappa[j] - _right_limit(s, samples.kappa[c:stop], samples.s[j])))
        aj = max(aj, abs(samples.alpha[j] - _right_limit(s, samples.alpha[c:stop], samples.s[j])))
    return float(kj), float(aj)


def steering_peaks(samples: SampledPath, limits: VehicleLimits) -> Tuple[float, float]:
    """phi_dot and phi_ddot peaks at ``limits.speed``, differentiating within each piece."""
    L = limits.wheelbase
    kl = samples.kappa * L
    phi_dot = limits.speed * L * samples.alpha / (1.0 + kl * kl)
    seg = samples.segment
    cuts = list(np.flatnonzero(np.diff(seg)) + 1)
    starts = [0] + cuts
    stops = cuts + [len(seg)]
    ddot = 0.0
    for a, b in zip(starts, stops):
        lo = max(a - 1, 0)  # include the shared junction sample
        s = samples.s[lo:b]
        f = phi_dot[lo:b]
        if len(s) >= 3:
            g = np.gradient(f, s, edge_order=2)
        elif len(s) == 2:
            g = np.diff(f) / np.diff(s)
        else:
            continue
        ddot = max(ddot, float(np.max(np.abs(g))) * limits.speed)
    return float(np.max(np.abs(phi_dot))), float(ddot)


def validate_samples(
    samples: SampledPath,
    limits: VehicleLimits,
    q_start: Optional[Configuration] = None,
    q_goal: Optional[Configuration] = None,
    pos_tol: float = POS_TOL,
    head_tol: float = HEAD_TOL,
    curv_tol: float = CURV_TOL,
    jump_tol: float = JUMP_TOL,
    gaps: Tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> ValidationReport:
    """Limit, continuity and endpoint checks on a sampled path.

    ``gaps`` is the junction mismatch from :func:`piece_gaps`, added to the
    endpoint errors.
    """
    kmax = limits.kappa_max
    max_k = float(np.max(np.abs(samples.kappa)))
    phi_peak = math.atan(max_k * limits.wheelbase)
    kj, aj = junction_jumps(samples)
    pd, pdd = steering_peaks(samples, limits)
    pos_err = head_err = curv_err = 0.0
    if q_goal is not None:
        end = samples.config(-1)
        pos_err = math.hypot(end.x - q_goal.x, end.y - q_goal.y)
        head_err = abs(normalize_angle(end.theta - q_goal.theta))
        curv_err = abs(end.kappa - q_goal.kappa)
    if q_start is not None:
        first = samples.config(0)
        pos_err = max(pos_err, math.hypot(first.x - q_start.x, first.y - q_start.y))
        head_err = max(head_err, abs(normalize_angle(first.theta - q_start.theta)))
        curv_err = max(curv_err, abs(first.kappa - q_start.kappa))
    pos_err += gaps[0]
    head_err += gaps[1]
    curv_err = float(curv_err + gaps[2])

    v = []
    if max_k > kmax * (1 + 1e-9):
        v.append(f"curvature {max_k:.6g} exceeds kappa_max {kmax:.6g}")
    if phi_peak > limits.phi_max * (1 + 1e-9):
        v.append(f"steering angle {phi_peak:.6g} exceeds {limits.phi_max:.6g}")
    if kj >= jump_tol:
        v.append(f"curvature discontinuity {kj:.3g}")
    if aj >= jump_tol:
        v.append(f"sharpness discontinuity {aj:.3g}")
    if pd > limits.phi_dot_max * (1 + LIMIT_TOL):
        v.append(f"steering rate peak {pd:.6g} exceeds {limits.phi_dot_max:.6g}")
    if pdd > limits.phi_ddot_max * (1 + LIMIT_TOL):
        v.append(f"steering acceleration peak {pdd:.6g} exceeds {limits.phi_ddot_max:.6g}")
    if pos_err > pos_tol:
        v.append(f"endpoint position error {pos_err:.3g}")
    if head_err > head_tol:
        v.append(f"endpoint heading error {head_err:.3g}")
    if curv_err > curv_tol:
        v.append(f"endpoint curvature error {curv_err:.3g}")
    return ValidationReport(max_k, phi_peak, kj, aj, pd, pdd, pos_err, head_err, curv_err, tuple(v))


def piece_gaps(pieces: Sequence[Piece]) -> Tuple[float, float, float]:
    """Summed (position, heading, curvature) mismatch where consecutive pieces meet.

    Chaining the pieces from the start reaches the goal with at most this much
    extra error, so it is added to the endpoint error.
    """
    pos = head = curv = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        pos += math.hypot(a.x[-1] - b.x[0], a.y[-1] - b.y[0])
        head += abs(normalize_angle(float(a.theta[-1] - b.theta[0])))
        curv += abs(a.kappa[-1] - b.kappa[0])
    return pos, head, curv


def validate_path(path: SCPath, limits: VehicleLimits) -> ValidationReport:
    """Check limits, junction continuity and endpoint accuracy of a planned path."""
    return validate_samples(path.samples, limits, path.q_start, path.q_goal, gaps=piece_gaps(path.pieces))
