"""Command-line front end: ``scpath plan | sweep | bench | simulate``.

Exit codes: 0 success, 2 usage error, 3 no SC path for the query, 4 invalid
scenario file.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .curvature_profile import DEFAULT_STEP, VehicleLimits, enforce_steering_limits
from .geometry import Configuration
from .precompute import SegmentCache
from .sc_planner import NoPathError, plan_dubins, plan_sc_path, validate_path
from .vehicle_sim import ConfigError, load_config, run_comparison

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4


def _config(text: str) -> Configuration:
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError(f"expected x,y,theta[,kappa], got {text!r}")
    try:
        values = [float(p) for p in parts]
        return Configuration(*values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad configuration {text!r}: {exc}") from None


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _scalings(text: str) -> List[float]:
    try:
        values = [_positive(p) for p in text.split(",")]
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(f"bad scaling list {text!r}") from None
    if len(values) < 2:
        raise argparse.ArgumentTypeError("a sweep needs at least two scalings")
    return values


def _limits(args) -> VehicleLimits:
    return VehicleLimits(args.wheelbase, args.phi_max, args.phi_dot_max, args.phi_ddot_max, args.speed)


def _vehicle_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = VehicleLimits()
    g = p.add_argument_group("vehicle limits")
    g.add_argument("--wheelbase", type=_positive, default=d.wheelbase, help="metres")
    g.add_argument("--phi-max", type=_positive, default=d.phi_max, help="steering angle limit, rad")
    g.add_argument("--phi-dot-max", type=_positive, default=d.phi_dot_max, help="steering rate limit, rad/s")
    g.add_argument("--phi-ddot-max", type=_positive, default=d.phi_ddot_max, help="steering acceleration limit, rad/s^2")
    g.add_argument("--speed", type=_positive, default=d.speed, help="speed at which limits are checked, m/s")
    g.add_argument("--step", type=_positive, default=DEFAULT_STEP, help="sampling step, m")
    g.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return p


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


# ---------------------------------------------------------------------------
# plan


def plan_result(path, limits: VehicleLimits, csv_name: str, validate: bool) -> dict:
    report = validate_path(path, limits)
    result = {
        "word": path.word,
        "total_length": path.total_length,
        "segments": [{"kind": s.kind, "length": s.length, "params": s.params} for s in path.segments],
        "samples_csv_path": csv_name,
        "diagnostics": {
            "phi_dot_peak": report.phi_dot_peak,
            "phi_ddot_peak": report.phi_ddot_peak,
            "endpoint_error": {
                "position": report.position_error,
                "heading": report.heading_error,
                "curvature": report.curvature_error,
            },
        },
    }
    if validate:
        result["validation"] = report.as_dict()
    return result


def cmd_plan(args) -> int:
    limits = _limits(args)
    cache = SegmentCache.build(limits, args.n_curvatures, args.step) if args.cache == "on" else None
    try:
        path = plan_sc_path(args.start, args.goal, limits, args.step, cache=cache, directions=args.directions)
    except NoPathError as exc:
        _error("no_sc_path", str(exc))
        return EXIT_INFEASIBLE
    result = plan_result(path, limits, "samples.csv", args.validate)
    _write(args.out / "plan.json", _dumps(result))
    _write(args.out / "samples.csv", path.samples.to_csv())
    print(f"word {path.word}")
    print(f"total_length {path.total_length:.9f}")
    diag = result["diagnostics"]
    print(f"phi_dot_peak {diag['phi_dot_peak']:.6f}")
    print(f"phi_ddot_peak {diag['phi_ddot_peak']:.6f}")
    print(f"endpoint_position_error {diag['endpoint_error']['position']:.3e}")
    if args.validate:
        violations = result["validation"]["violations"]
        print(f"violations {len(violations)}")
        for v in violations:
            print(f"  {v}")
        if violations:
            return 1
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def sharpness_proxy(limits: VehicleLimits) -> float:
    """Peak sharpness of the zero to maximum curvature transition."""
    seg = enforce_steering_limits(0.0, limits.kappa_max, limits)
    return 1.5 * limits.kappa_max / seg.s_f


def sweep_rows(q_start, q_goal, limits: VehicleLimits, scalings: Sequence[float], step: float = DEFAULT_STEP) -> List[dict]:
    """One row per scaling; forward-only SC paths against the Dubins length."""
    dubins = plan_dubins(q_start, q_goal, 1.0 / limits.kappa_max).total_length
    rows = []
    for k in scalings:
        lim = limits.scaled(k)
        try:
            sc = plan_sc_path(q_start, q_goal, lim, step, directions="forward").total_length
        except NoPathError:
            sc = None
        rows.append(
            {
                "scaling": k,
                "alpha_max_proxy": sharpness_proxy(lim),
                "sc_length": sc,
                "dubins_length": dubins,
                "ratio": None if sc is None else sc / dubins,
            }
        )
    return rows


def rows_monotone(rows) -> bool:
    lengths = [r["sc_length"] for r in rows]
    if any(v is None for v in lengths):
        return False
    return all(b <= a + 1e-9 for a, b in zip(lengths, lengths[1:]))


def cmd_sweep(args) -> int:
    limits = _limits(args)
    rows = sweep_rows(args.start, args.goal, limits, args.scalings, args.step)
    lines = ["scaling,alpha_max_proxy,sc_length,dubins_length,ratio"]
    for r in rows:
        if r["sc_length"] is None:
            lines.append(f"{r['scaling']!r},{r['alpha_max_proxy']!r},infeasible,{r['dubins_length']!r},")
        else:
            lines.append(",".join(repr(r[k]) for k in ("scaling", "alpha_max_proxy", "sc_length", "dubins_length", "ratio")))
    text = "\n".join(lines) + "\n"
    _write(args.out / "sweep.csv", text)
    sys.stdout.write(text)
    monotone = rows_monotone(rows)
    print(f"monotone {str(monotone).lower()}")
    last = rows[-1]
    if last["ratio"] is not None:
        print(f"last_excess {last['ratio'] - 1.0:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


@dataclass(frozen=True)
class BenchmarkProtocol:
    n_queries: int = 1000
    repeats_per_query: int = 100
    xy_range: float = 50.0
    curvature_set_size: int = 11
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_queries < 1 or self.repeats_per_query < 1:
            raise ValueError("query and repeat counts must be positive")
        if self.curvature_set_size < 3 or self.curvature_set_size % 2 == 0:
            raise ValueError("curvature set size must be odd and at least 3")
        if not self.xy_range > 0:
            raise ValueError("xy range must be positive")


def benchmark_queries(protocol: BenchmarkProtocol, curvatures: np.ndarray):
    """Seeded start/goal pairs: positions uniform in the square, headings in
    [-pi, pi), curvatures drawn from the set."""
    rng = np.random.default_rng(protocol.rng_seed)
    n = protocol.n_queries
    r = protocol.xy_range
    xy = rng.uniform(-r, r, size=(n, 4))
    th = rng.uniform(-math.pi, math.pi, size=(n, 2))
    kk = curvatures[rng.integers(0, len(curvatures), size=(n, 2))]
    return [
        (
            Configuration(float(xy[i, 0]), float(xy[i, 1]), float(th[i, 0]), float(kk[i, 0])),
            Configuration(float(xy[i, 2]), float(xy[i, 3]), float(th[i, 1]), float(kk[i, 1])),
        )
        for i in range(n)
    ]


def run_benchmark(protocol: BenchmarkProtocol, limits: VehicleLimits, cache_on: bool, step: float = DEFAULT_STEP,
                  cache: Optional[SegmentCache] = None) -> dict:
    """Time every query ``repeats_per_query`` times; latency is the per-query mean."""
    t0 = time.perf_counter()
    if cache is None:
        cache = SegmentCache.build(limits, protocol.curvature_set_size, step)
    build_seconds = time.perf_counter() - t0
    queries = benchmark_queries(protocol, cache.curvatures)
    use = cache if cache_on else None
    # warm up compiled kernels outside the timed region
    try:
        plan_sc_path(*queries[0], limits, step, cache=use)
    except NoPathError:
        pass
    latencies = np.empty(len(queries))
    lengths = []
    clock = time.perf_counter
    for i, (a, b) in enumerate(queries):
        length = None
        t = clock()
        for _ in range(protocol.repeats_per_query):
            try:
                length = plan_sc_path(a, b, limits, step, cache=use).total_length
            except NoPathError:
                length = None
        latencies[i] = (clock() - t) / protocol.repeats_per_query
        lengths.append(length)
    return {
        "cache": "on" if cache_on else "off",
        "n_queries": protocol.n_queries,
        "repeats_per_query": protocol.repeats_per_query,
        "cache_build_seconds": build_seconds,
        "mean_us": float(np.mean(latencies) * 1e6),
        "median_us": float(np.median(latencies) * 1e6),
        "p99_us": float(np.percentile(latencies, 99) * 1e6),
        "lengths": lengths,
    }


def cmd_bench(args) -> int:
    limits = _limits(args)
    try:
        protocol = BenchmarkProtocol(args.queries, args.repeats, args.xy_range, args.n_curvatures, args.seed)
    except ValueError as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    modes = {"on": [True], "off": [False], "both": [False, True]}[args.cache]
    cache = SegmentCache.build(limits, protocol.curvature_set_size, args.step)
    reports = [run_benchmark(protocol, limits, m, args.step, cache) for m in modes]
    summary = {"protocol": protocol.__dict__, "runs": []}
    for rep in reports:
        summary["runs"].append({k: v for k, v in rep.items() if k != "lengths"})
        print(f"cache {rep['cache']}: mean {rep['mean_us']:.1f} us, median {rep['median_us']:.1f} us, p99 {rep['p99_us']:.1f} us")
    if len(reports) == 2:
        summary["speedup"] = reports[0]["mean_us"] / reports[1]["mean_us"]
        same = all(
            (a is None and b is None) or (a is not None and b is not None and abs(a - b) <= 1e-9)
            for a, b in zip(reports[0]["lengths"], reports[1]["lengths"])
        )
        summary["lengths_identical"] = same
        print(f"speedup {summary['speedup']:.1f}x, lengths identical: {str(same).lower()}")
    _write(args.out / "bench.json", _dumps(summary))
    lines = ["query,length"] + [f"{i},{'' if v is None else repr(v)}" for i, v in enumerate(reports[-1]["lengths"])]
    _write(args.out / "bench_lengths.csv", "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    modes = {"closed": [True], "feedforward": [False], "both": [True, False]}[args.mode]
    summary = {"config": config.to_dict(), "runs": []}
    for fb in modes:
        res = run_comparison(config, feedback_enabled=fb)
        tag = "closed" if fb else "feedforward"
        for kind, trace, s in (("cc", res.cc_trace, res.cc_summary), ("sc", res.sc_trace, res.sc_summary)):
            name = f"{kind}_{tag}.csv"
            _write(args.out / name, trace.to_csv())
            summary["runs"].append(
                {
                    "reference": kind,
                    "mode": tag,
                    "trace_csv_path": name,
                    "max_e_lat": s.max_e_lat,
                    "max_e_head": s.max_e_head,
                    "max_jerk": s.max_jerk,
                    "settled": s.settled,
                    "diverged": trace.diverged,
                }
            )
            print(f"{tag:11s} {kind}: max|e_lat| {s.max_e_lat:.4f} m, max|jerk| {s.max_jerk:.4f} m/s^3, settled {str(s.settled).lower()}")
        if not fb:
            summary["jerk_comparison"] = {
                "cc_max_jerk": res.cc_summary.max_jerk,
                "sc_max_jerk": res.sc_summary.max_jerk,
                "sc_lower": res.sc_summary.max_jerk < res.cc_summary.max_jerk,
            }
    _write(args.out / "summary.json", _dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scpath", description="Sharpness-continuous path planning and tracking simulation.")
    sub = parser.add_subparsers(dest="command", required=True)
    veh = _vehicle_parent()

    p = sub.add_parser("plan", parents=[veh], help="plan one SC path")
    p.add_argument("--start", type=_config, required=True, help="x,y,theta,kappa (rad, 1/m)")
    p.add_argument("--goal", type=_config, required=True, help="x,y,theta,kappa (rad, 1/m)")
    p.add_argument("--cache", choices=("on", "off"), default="off", help="use precomputed transitions")
    p.add_argument("--n-curvatures", type=int, default=11, help="curvature set size for --cache on")
    p.add_argument("--directions", choices=("both", "forward"), default="both")
    p.add_argument("--validate", action="store_true", help="report limit and continuity violations")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", parents=[veh], help="SC length against Dubins as the limits scale up")
    p.add_argument("--start", type=_config, required=True)
    p.add_argument("--goal", type=_config, required=True)
    p.add_argument("--scalings", type=_scalings, default=[1.0, 2.0, 4.0, 8.0, 16.0], help="comma separated, at least two")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", parents=[veh], help="query latency with and without the cache")
    p.add_argument("--cache", choices=("on", "off", "both"), default="both")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--xy-range", type=_positive, default=50.0)
    p.add_argument("--n-curvatures", type=int, default=11)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="track CC and SC references of a scenario")
    p.add_argument("--config", type=Path, default=None, help="scenario JSON (default: packaged scenario)")
    p.add_argument("--mode", choices=("closed", "feedforward", "both"), default="both")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "wheelbase"):
        try:
            limits = _limits(args)
        except ValueError as exc:
            parser.error(str(exc))
        for name in ("start", "goal"):
            q = getattr(args, name, None)
            if q is not None and abs(q.kappa) > limits.kappa_max * (1 + 1e-12):
                parser.error(f"--{name} curvature {q.kappa:g} exceeds kappa_max {limits.kappa_max:.6g}")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
