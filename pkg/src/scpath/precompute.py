"""Canonical transitions precomputed over a discrete curvature set.

Turns only ever need transitions between the start/goal curvature and
``+-kappa_max`` or zero. When those curvatures come from a fixed set, every
transition can be built once at the origin and reused through a rigid motion.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from .curvature_profile import (
    DEFAULT_STEP,
    CubicCurvatureSegment,
    SampledPath,
    Transition,
    VehicleLimits,
    build_transition,
)

FORMAT_VERSION = 1
SET_TOL = 1e-12


class NotInSetError(KeyError):
    """A curvature is not a member of the cache's curvature set."""


def curvature_set(kappa_max: float, n: int) -> np.ndarray:
    """``n`` equispaced curvatures over [-kappa_max, kappa_max], exactly symmetric."""
    if n < 3 or n % 2 == 0:
        raise ValueError("n_curvatures must be odd and at least 3")
    m = (n - 1) // 2
    pos = np.array([kappa_max * j / m for j in range(1, m + 1)])
    pos[-1] = kappa_max
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass(frozen=True)
class SegmentCache:
    """Read-only table of canonical transitions keyed by curvature-set indices."""

    limits: VehicleLimits
    step: float
    curvatures: np.ndarray
    entries: Dict[Tuple[int, int], Transition] = field(repr=False)
    build_seconds: float = 0.0

    def __post_init__(self):
        # exact-value index; -0.0 and 0.0 hash alike
        by_value = {(e.kappa_from, e.kappa_to): e for e in self.entries.values()}
        object.__setattr__(self, "_by_value", by_value)
        object.__setattr__(self, "_limits_fp", self.limits.fingerprint())

    @property
    def fingerprint(self) -> str:
        return f"{self.limits.fingerprint()}|{float(self.step).hex()}"

    @classmethod
    def build(cls, limits: VehicleLimits, n_curvatures: int = 11, step: float = DEFAULT_STEP) -> "SegmentCache":
        t0 = time.perf_counter()
        ks = curvature_set(limits.kappa_max, n_curvatures)
        entries = {}
        for i, kf in enumerate(ks):
            for j, kt in enumerate(ks):
                entries[(i, j)] = build_transition(float(kf), float(kt), limits, step)
        return cls(limits, float(step), ks, entries, time.perf_counter() - t0)

    def index(self, kappa: float) -> int:
        """Position of ``kappa`` in the set, or :class:`NotInSetError`."""
        ks = self.curvatures
        kmax = ks[-1]
        j = int(round((kappa + kmax) / (2.0 * kmax) * (len(ks) - 1)))
        if 0 <= j < len(ks) and abs(ks[j] - kappa) <= SET_TOL:
            return j
        raise NotInSetError(f"curvature {kappa!r} is not in the cached set")

    def lookup(self, kappa_from: float, kappa_to: float) -> Transition:
        """Constant-time retrieval of a canonical transition between set members."""
        hit = self._by_value.get((kappa_from, kappa_to))
        if hit is not None:
            return hit
        return self.entries[(self.index(kappa_from), self.index(kappa_to))]

    def get(self, kappa_from: float, kappa_to: float) -> Transition:
        """Cached transition when both curvatures are members, a fresh build otherwise."""
        try:
            return self.lookup(kappa_from, kappa_to)
        except NotInSetError:
            return build_transition(kappa_from, kappa_to, self.limits, self.step)

    def check_compatible(self, limits: VehicleLimits, step: float) -> None:
        if limits is not self.limits and limits.fingerprint() != self._limits_fp:
            raise ValueError("cache was built for different vehicle limits or step")
        if float(step) != self.step:
            raise ValueError("cache was built for different vehicle limits or step")

    def save(self, path) -> None:
        """Write the cache as an ``.npz`` archive; :meth:`load` restores it bit for bit."""
        keys = sorted(self.entries)
        coef = np.array([self.entries[k].segment.coefficients + (self.entries[k].segment.s_f,) for k in keys])
        counts = np.array([len(self.entries[k].samples) for k in keys], dtype=np.int64)
        cols = {
            name: np.concatenate([getattr(self.entries[k].samples, name) for k in keys])
            for name in ("s", "x", "y", "theta", "kappa", "alpha")
        }
        lim = self.limits
        np.savez(
            path,
            version=np.array(FORMAT_VERSION),
            fingerprint=np.array(self.fingerprint),
            limits=np.array([lim.wheelbase, lim.phi_max, lim.phi_dot_max, lim.phi_ddot_max, lim.speed]),
            step=np.array(self.step),
            curvatures=self.curvatures,
            keys=np.array(keys, dtype=np.int64).reshape(-1, 2),
            coefficients=coef,
            counts=counts,
            **{f"samples_{n}": v for n, v in cols.items()},
        )

    @classmethod
    def load(cls, path, limits: VehicleLimits = None) -> "SegmentCache":
        """Read a cache; with ``limits`` given the stored fingerprint must match."""
        with np.load(Path(path), allow_pickle=False) as data:
            if int(data["version"]) != FORMAT_VERSION:
                raise ValueError(f"unsupported cache format version {int(data['version'])}")
            stored = VehicleLimits(*(float(v) for v in data["limits"]))
            step = float(data["step"])
            cache_fp = f"{stored.fingerprint()}|{step.hex()}"
            if str(data["fingerprint"]) != cache_fp:
                raise ValueError("cache file is corrupt: fingerprint does not match its contents")
            if limits is not None and limits.fingerprint() != stored.fingerprint():
                raise ValueError("cache file was built for different vehicle limits")
            ks = data["curvatures"].copy()
            offsets = np.concatenate([[0], np.cumsum(data["counts"])])
            cols = {n: data[f"samples_{n}"] for n in ("s", "x", "y", "theta", "kappa", "alpha")}
            entries = {}
            for row, (i, j) in enumerate(data["keys"]):
                a0, a1, a2, a3, s_f = (float(v) for v in data["coefficients"][row])
                sl = slice(offsets[row], offsets[row + 1])
                samples = SampledPath(*(cols[n][sl].copy() for n in ("s", "x", "y", "theta", "kappa", "alpha")))
                entries[(int(i), int(j))] = Transition(
                    float(ks[i]), float(ks[j]), CubicCurvatureSegment(a0, a1, a2, a3, s_f), samples
                )
        return cls(stored, step, ks, entries)


def build_cache(limits: VehicleLimits, n_curvatures: int = 11, step: float = DEFAULT_STEP) -> SegmentCache:
    return SegmentCache.build(limits, n_curvatures, step)


def lookup_segment(cache: SegmentCache, kappa_from: float, kappa_to: float) -> Transition:
    return cache.lookup(kappa_from, kappa_to)
