"""Compiled vs. pure kernels, timed side by side in one process.

Each kernel is called with identical inputs through its numba build and its
fallback, after one warm-up call so compilation is not counted. The outputs
are compared so a speedup never hides a numerical difference.

    python3 benchmarks/bench_kernels.py [--repeats N] [--json out.json]
"""
import argparse
import json
import time

import numpy as np

from scpath import _kernels
from scpath._accel import HAVE_NUMBA
from scpath.curvature_profile import VehicleLimits, arc_grid, build_transition
from scpath.geometry import Configuration
from scpath.sc_planner import _turn_rows
from scpath.vehicle_sim import ActuatorState, ControllerConfig, kernel_inputs, sc_reference_profile


def _best_of(fn, args, repeats):
    fn(*args)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    same = (a == b) | (np.isnan(a) & np.isnan(b))
    with np.errstate(invalid="ignore"):
        d = np.where(same, 0.0, np.abs(a - b))
    return float(np.max(d)) if d.size else 0.0


def cases(limits):
    seg = build_transition(0.0, limits.kappa_max, limits).segment
    s = arc_grid(seg.s_f, 1e-4)
    coeffs = (seg.a0, seg.a1, seg.a2, seg.a3)

    q_s = Configuration(0.0, 0.0, 0.3, 0.02)
    q_g = Configuration(25.0, -8.0, 2.1, -0.05)
    starts, _ = _turn_rows(q_s, limits, 0.01, None, False, "both")
    goals, _ = _turn_rows(q_g, limits, 0.01, None, True, "both")

    ref = sc_reference_profile(12.775, np.pi / 2, 30.0, limits)
    sim_args = kernel_inputs(ref, ActuatorState.from_limits(limits), ControllerConfig(), limits.speed, 0.01)

    return [
        ("integrate_cubic", _kernels.integrate_cubic_numba, _kernels.integrate_cubic_numpy,
         coeffs + (0.0, 0.0, 0.0, s)),
        ("steering_series", _kernels.steering_series_numba, _kernels.steering_series_numpy,
         coeffs + (s, limits.wheelbase, limits.speed)),
        ("candidate_table", _kernels.candidate_table_numba, _kernels.candidate_table_numpy, (starts, goals)),
        ("simulate_loop", _kernels.simulate_loop, _kernels.simulate_loop.py_func, sim_args),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--json", default=None, help="also write the table as JSON")
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    limits = VehicleLimits()
    rows = []
    print(f"{'kernel':<16} {'numba [us]':>12} {'pure [us]':>12} {'speedup':>9} {'max |diff|':>11}")
    for name, fast, slow, kargs in cases(limits):
        t_fast = _best_of(fast, kargs, args.repeats)
        t_slow = _best_of(slow, kargs, max(1, args.repeats // 4) if name == "simulate_loop" else args.repeats)
        diff = _max_diff(fast(*kargs), slow(*kargs))
        rows.append({"kernel": name, "numba_us": t_fast * 1e6, "pure_us": t_slow * 1e6,
                     "speedup": t_slow / t_fast, "max_abs_diff": diff})
        print(f"{name:<16} {t_fast * 1e6:12.1f} {t_slow * 1e6:12.1f} {t_slow / t_fast:8.1f}x {diff:11.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
