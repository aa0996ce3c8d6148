"""Command-line harness: grid benchmarks, single runs, property checks,
traffic pinning."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bench
from .baselines import make_scheduler, parse_scheduler
from .simulation import BuildingConfig, Simulator
from .submodular import (
    Objective,
    PartitionMatroid,
    brute_force_optimal,
    check_submodular,
    greedy_maximize,
    greedy_maximize_trace,
)
from .traffic import TrafficSpec, generate, save_traffic
from .waiting_model import (
    DestinationDistribution,
    WeightConfig,
    build_weights,
    pairwise_weight,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="liftsched",
        description="Group-elevator dispatch benchmarks and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the benchmark grid")
    p_run.add_argument("--config", type=Path, default=None,
                       help="JSON config; defaults cover the standard grid")
    p_run.add_argument("--out", type=Path, default=Path("bench-out"))
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--seeds", type=str, default=None,
                       help="comma-separated seed list override")
    p_run.add_argument("--schedulers", type=str, default=None,
                       help="comma-separated scheduler list override")

    p_sim = sub.add_parser("simulate", help="run one scenario")
    p_sim.add_argument("--floors", type=int, default=8)
    p_sim.add_argument("--cars", type=int, default=3)
    p_sim.add_argument("--rate", type=float, default=20.0)
    p_sim.add_argument("--seed", type=int, default=1)
    p_sim.add_argument("--scheduler", type=str, default="greedy")
    p_sim.add_argument("--duration", type=float, default=3600.0)
    p_sim.add_argument("--pattern", type=str, default="interfloor")
    p_sim.add_argument("--population", type=int, default=None)
    p_sim.add_argument("--trace", type=Path, default=None,
                       help="write the event trace as JSON lines")

    p_ver = sub.add_parser("verify", help="run the property suite")
    p_ver.add_argument("--trials", type=int, default=60)
    p_ver.add_argument("--seed", type=int, default=2026)

    p_gen = sub.add_parser("gen-traffic", help="pin a traffic file")
    p_gen.add_argument("--floors", type=int, default=8)
    p_gen.add_argument("--rate", type=float, default=20.0)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--duration", type=float, default=3600.0)
    p_gen.add_argument("--pattern", type=str, default="interfloor")
    p_gen.add_argument("--population", type=int, default=None)
    p_gen.add_argument("--out", type=Path, required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_gen_traffic(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _cmd_run(args) -> int:
    cfg = bench.load_config(args.config)
    if args.seeds:
        cfg["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.schedulers:
        names = [s.strip() for s in args.schedulers.split(",")]
        for n in names:
            parse_scheduler(n)
        cfg["schedulers"] = names
        cfg["comparisons"] = [[names[0], other] for other in names[1:]]
    report = bench.run_grid(cfg, jobs=args.jobs, progress=True)
    files = bench.emit(report, ["csv", "json", "plotdata"], args.out)
    for path in files:
        print(f"wrote {path}")
    for challenger, baseline in report.config["comparisons"]:
        red = report.reduction(challenger, baseline)
        print(f"{challenger} vs {baseline}: grand AWT reduction "
              f"{red['grand']:+.2f}%")
    if report.failures:
        print(f"{len(report.failures)} cell runs failed (see report.json)")
    return 0


def _cmd_simulate(args) -> int:
    building = BuildingConfig(floors=args.floors, cars=args.cars,
                              population=args.population)
    spec = TrafficSpec(args.pattern, args.rate, args.duration, seed=args.seed)
    traffic = generate(spec, building)
    trace = [] if args.trace else None
    sim = Simulator(building, make_scheduler(args.scheduler, building),
                    trace=trace)
    stats = sim.run(traffic, horizon=args.duration, seed=args.seed)
    print(f"passengers: {len(traffic)}  served: {stats.served}  "
          f"unserved: {stats.unserved_at_end}")
    print(f"awt: {stats.awt:.3f} s  att: {stats.att:.3f} s")
    if args.trace:
        with open(args.trace, "w") as fh:
            for e in trace:
                fh.write(json.dumps(asdict(e), sort_keys=True) + "\n")
        print(f"wrote {args.trace} ({len(trace)} events)")
    return 0


def _cmd_verify(args) -> int:
    sys.path.insert(0, str(Path(__file__).resolve().parent))
    rng = np.random.default_rng(args.seed)
    failures = 0

    def report(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}{'  ' + detail if detail else ''}")
        failures += 0 if ok else 1

    from .kinematics import (DEFAULT_LIMITS, MotionLimits, plan_rest_to_rest,
                             travel_time_rest_to_rest)

    worst = 0.0
    for _ in range(args.trials):
        limits = MotionLimits(float(rng.uniform(0.5, 4.0)),
                              float(rng.uniform(0.4, 2.5)),
                              float(rng.uniform(0.5, 4.0)))
        d = float(rng.uniform(0.01, 60.0))
        t = travel_time_rest_to_rest(d, limits)
        segments = plan_rest_to_rest(d, limits)
        p = v = a = 0.0
        for duration, jerk in segments:
            steps = int(duration // 0.001)
            rem = duration - steps * 0.001
            for h in [0.001] * steps + ([rem] if rem > 1e-15 else []):
                p += v * h + 0.5 * a * h * h + jerk * h ** 3 / 6.0
                v += a * h + 0.5 * jerk * h * h
                a += jerk * h
        worst = max(worst, abs(p - d))
    report("kinematics profile lands on target", worst < 1e-6,
           f"worst {worst:.2e} m over {args.trials} profiles")

    ws_list = []
    from .kinematics import CarKinematicState  # noqa: F401  (generator deps)
    from .waiting_model import CarSnapshot, Direction, HallCall

    def rand_state(floors, n_cars, n_calls):
        cfg = WeightConfig(num_floors=floors, coincident_bonus=False,
                           capacity_penalty=False)
        dist = DestinationDistribution.uniform(floors)
        snaps = [_rand_snapshot(rng, cfg, k) for k in range(n_cars)]
        combos = [(f, Direction.UP) for f in range(1, floors)]
        combos += [(f, Direction.DOWN) for f in range(2, floors + 1)]
        picks = rng.choice(len(combos), size=n_calls, replace=False)
        calls = [HallCall(k, *combos[int(i)],
                          press_time=float(rng.uniform(0, 50)))
                 for k, i in enumerate(picks)]
        return build_weights(snaps, calls, dist, cfg), snaps, calls, dist, cfg

    neg = 0
    for _ in range(args.trials):
        floors = int(rng.integers(4, 13))
        ws, snaps, calls, dist, cfg = rand_state(floors, int(rng.integers(1, 4)),
                                                 int(rng.integers(2, 5)))
        ws_list.append(ws)
        w = pairwise_weight(snaps[0], calls[0], calls[1], dist, cfg)
        if w < -1e-9:
            neg += 1
    report("pairwise excess nonnegative", neg == 0, f"{args.trials} states")

    violations = 0
    for ws in ws_list[:max(args.trials // 3, 5)]:
        rep = check_submodular(Objective(ws), trials=40, rng=rng)
        violations += len(rep.violations)
    report("objective diminishing returns", violations == 0)

    bad_monotone = 0
    bad_bound = 0
    bad_basis = 0
    for ws in ws_list[:max(args.trials // 3, 5)]:
        obj = Objective(ws)
        matroid = PartitionMatroid(ws.n_calls, ws.n_cars)
        trace = greedy_maximize_trace(obj, matroid)
        if any(gain < -1e-9 for _, gain in trace.picks):
            bad_monotone += 1
        if sorted(trace.assignment.car_of()) != list(range(ws.n_calls)):
            bad_basis += 1
        if ws.n_cars ** ws.n_calls <= 10 ** 5:
            opt = brute_force_optimal(obj, matroid)
            if obj.f_value(trace.assignment) < 0.5 * obj.f_value(opt) - 1e-9:
                bad_bound += 1
    report("greedy gains nonnegative", bad_monotone == 0)
    report("greedy returns a complete assignment", bad_basis == 0)
    report("greedy at least half of the exhaustive optimum", bad_bound == 0)
    return 0 if failures == 0 else 1


def _rand_snapshot(rng, cfg, index):
    from .kinematics import CarKinematicState
    from .waiting_model import CarSnapshot, Direction

    floors = cfg.num_floors
    floor = int(rng.integers(1, floors + 1))
    calls = frozenset()
    committed = None
    if rng.random() < 0.5 and floor < floors:
        k = int(rng.integers(1, 3))
        pool = list(range(floor + 1, floors + 1))
        calls = frozenset(int(f) for f in
                          rng.choice(pool, size=min(k, len(pool)), replace=False))
        committed = Direction.UP
    return CarSnapshot(index, CarKinematicState((floor - 1) * cfg.floor_height),
                       committed, calls, load=len(calls), capacity=10)


def _cmd_gen_traffic(args) -> int:
    building = BuildingConfig(floors=args.floors, cars=1,
                              population=args.population)
    spec = TrafficSpec(args.pattern, args.rate, args.duration, seed=args.seed)
    passengers = generate(spec, building)
    save_traffic(args.out, passengers)
    print(f"wrote {args.out} ({len(passengers)} passengers)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
