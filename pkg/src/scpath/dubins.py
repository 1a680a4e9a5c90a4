"""Shortest bounded-curvature forward paths between poses (six-word enumeration)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .curvature_profile import DEFAULT_STEP, SampledPath, arc_grid
from .geometry import TWO_PI, Configuration
from .sc_turn import Piece, join_pieces

WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


def _mod2pi(a: float) -> float:
    r = a % TWO_PI
    return 0.0 if r >= TWO_PI else r


def _lsl(a, b, d, sa, sb, ca, cb, cab):
    p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
    if p2 < 0:
        return None
    tmp = math.atan2(cb - ca, d + sa - sb)
    return _mod2pi(-a + tmp), math.sqrt(p2), _mod2pi(b - tmp)


def _rsr(a, b, d, sa, sb, ca, cb, cab):
    p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
    if p2 < 0:
        return None
    tmp = math.atan2(ca - cb, d - sa + sb)
    return _mod2pi(a - tmp), math.sqrt(p2), _mod2pi(-b + tmp)


def _lsr(a, b, d, sa, sb, ca, cb, cab):
    p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
    if p2 < 0:
        return None
    p = math.sqrt(p2)
    tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
    return _mod2pi(-a + tmp), p, _mod2pi(-b + tmp)


def _rsl(a, b, d, sa, sb, ca, cb, cab):
    p2 = d * d - 2 + 2 * cab - 2 * d * (sa + sb)
    if p2 < 0:
        return None
    p = math.sqrt(p2)
    tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
    return _mod2pi(a - tmp), p, _mod2pi(b - tmp)


def _rlr(a, b, d, sa, sb, ca, cb, cab):
    tmp = (6.0 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(TWO_PI - math.acos(tmp))
    t = _mod2pi(a - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
    return t, p, _mod2pi(a - b - t + p)


def _lrl(a, b, d, sa, sb, ca, cb, cab):
    tmp = (6.0 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(TWO_PI - math.acos(tmp))
    t = _mod2pi(-a - math.atan2(ca - cb, d + sa - sb) + p / 2.0)
    return t, p, _mod2pi(b - a - t + p)


_SOLVERS = {"LSL": _lsl, "RSR": _rsr, "LSR": _lsr, "RSL": _rsl, "RLR": _rlr, "LRL": _lrl}


@dataclass(frozen=True)
class DubinsPath:
    """``params`` are normalized by ``rho``: arc angles for L/R, distance over rho for S."""

    word: str
    params: Tuple[float, float, float]
    rho: float
    q_start: Configuration

    @property
    def lengths(self) -> Tuple[float, float, float]:
        return tuple(p * self.rho for p in self.params)

    @property
    def total_length(self) -> float:
        return sum(self.params) * self.rho


def dubins_words(q_start: Configuration, q_goal: Configuration, rho: float) -> Dict[str, Optional[Tuple[float, float, float]]]:
    """Normalized parameters of every word (``None`` where a word does not exist)."""
    if not rho > 0:
        raise ValueError("turning radius must be positive")
    dx = q_goal.x - q_start.x
    dy = q_goal.y - q_start.y
    d = math.hypot(dx, dy) / rho
    th = _mod2pi(math.atan2(dy, dx)) if d > 0 else 0.0
    a = _mod2pi(q_start.theta - th)
    b = _mod2pi(q_goal.theta - th)
    sa, sb, ca, cb = math.sin(a), math.sin(b), math.cos(a), math.cos(b)
    cab = math.cos(a - b)
    return {w: _SOLVERS[w](a, b, d, sa, sb, ca, cb, cab) for w in WORDS}


def plan_dubins(q_start: Configuration, q_goal: Configuration, rho: float) -> DubinsPath:
    """Shortest of the six words; ties go to the earlier word in ``WORDS``."""
    best = None
    for word, params in dubins_words(q_start, q_goal, rho).items():
        if params is None:
            continue
        if best is None or sum(params) < sum(best[1]):
            best = (word, params)
    return DubinsPath(best[0], best[1], rho, q_start)


def dubins_pieces(path: DubinsPath, step: float = DEFAULT_STEP):
    x, y, th = path.q_start.x, path.q_start.y, path.q_start.theta
    rho = path.rho
    pieces = []
    for letter, p in zip(path.word, path.params):
        length = p * rho
        if length <= 0.0:
            continue
        s = arc_grid(length, step)
        if letter == "S":
            xs = x + s * math.cos(th)
            ys = y + s * math.sin(th)
            ths = np.full_like(s, th)
            k = 0.0
            params = {"start": [x, y], "end": [float(xs[-1]), float(ys[-1])]}
        else:
            sign = 1 if letter == "L" else -1
            cx = x - sign * rho * math.sin(th)
            cy = y + sign * rho * math.cos(th)
            ths = th + sign * s / rho
            xs = cx + sign * rho * np.sin(ths)
            ys = cy - sign * rho * np.cos(ths)
            k = sign / rho
            params = {"center": [cx, cy], "radius": rho, "kappa": k, "sweep": sign * p}
        pieces.append(
            Piece("line" if letter == "S" else "arc", length, 1, s, xs, ys, ths, np.full_like(s, k), np.zeros_like(s), params)
        )
        x, y, th = float(xs[-1]), float(ys[-1]), float(ths[-1])
    return pieces


def sample_dubins(path: DubinsPath, step: float = DEFAULT_STEP) -> SampledPath:
    return join_pieces(dubins_pieces(path, step))
