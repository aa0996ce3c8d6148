"""Benchmark harness: runs the scheduler comparison grid and emits reports.

A grid cell is (floors, cars, rate); every scheduler in a cell consumes a
byte-identical passenger stream per seed, generated from a seed derived
deterministically from (floors, rate, seed) so that car-count variations
share traffic too. Reports carry per-cell mean/std waiting times and
percent reductions between scheduler pairs; the grand reduction is the
mean of the per-cell reductions.
"""
from __future__ import annotations

import csv
import json
import multiprocessing as mp
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import make_scheduler, parse_scheduler
from .kinematics import DoorTiming, MotionLimits
from .simulation import BuildingConfig, Passenger, Simulator
from .traffic import TrafficSpec, generate

BENCH_SCHEMA = "liftsched-bench-v1"
REPORT_SCHEMA = "liftsched-report-v1"

DEFAULT_CONFIG: dict = {
    "schema": BENCH_SCHEMA,
    "grid": {
        "floors": [8, 10, 12],
        "cars": [2, 3, 4, 5, 6],
        "rates": [10, 15, 20, 25, 30],
    },
    "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    "schedulers": ["greedy", "eta", "collective"],
    "comparisons": None,
    "traffic": {"pattern": "interfloor", "duration": 3600.0},
    "building": {
        "floor_height": 3.5,
        "car_capacity": 10,
        "population_per_floor": 20,
        "rated_speed": 1.6,
        "max_accel": 1.0,
        "max_jerk": 1.6,
        "door_open": 2.0,
        "door_dwell": 3.0,
        "door_close": 3.0,
    },
    "epoch_interval": 1.0,
    "lock_threshold": 3.0,
}


def load_config(source: str | Path | dict | None) -> dict:
    """Merge a config file or dict over the defaults; unknown keys fail."""
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = source
    else:
        raw = json.loads(Path(source).read_text())
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    _merge_strict(cfg, raw, path="")
    if cfg["schema"] != BENCH_SCHEMA:
        raise ValueError(f"unsupported config schema {cfg['schema']!r}")
    for name in cfg["schedulers"]:
        parse_scheduler(name)
    if cfg["comparisons"] is None:
        base = cfg["schedulers"]
        cfg["comparisons"] = [[base[0], other] for other in base[1:]]
    for a, b in cfg["comparisons"]:
        if a not in cfg["schedulers"] or b not in cfg["schedulers"]:
            raise ValueError(f"comparison ({a}, {b}) references unknown scheduler")
    return cfg


def _merge_strict(base: dict, override: dict, path: str) -> None:
    for key, value in override.items():
        if key not in base:
            raise ValueError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge_strict(base[key], value, path + key + ".")
        else:
            base[key] = value


def building_from_config(cfg: dict, floors: int, cars: int) -> BuildingConfig:
    b = cfg["building"]
    return BuildingConfig(
        floors=floors,
        cars=cars,
        floor_height=b["floor_height"],
        car_capacity=b["car_capacity"],
        motion=MotionLimits(b["rated_speed"], b["max_accel"], b["max_jerk"]),
        doors=DoorTiming(b["door_open"], b["door_dwell"], b["door_close"]),
        population=b["population_per_floor"] * floors,
    )


def traffic_seed(floors: int, rate: float, seed: int) -> int:
    ss = np.random.SeedSequence((floors, int(round(rate * 1000)), seed))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class CellResult:
    """Aggregated outcome of one (floors, cars, rate, scheduler) cell."""

    floors: int
    cars: int
    rate: float
    scheduler: str
    awt_mean: float
    awt_std: float
    served: int
    unserved: int
    passengers: int
    seed_awts: tuple[float, ...]

    @property
    def key(self) -> tuple:
        return (self.floors, self.cars, self.rate, self.scheduler)


@dataclass
class ComparisonReport:
    """All cell results plus the reduction arithmetic between schedulers."""

    config: dict
    cells: list[CellResult]
    failures: list[dict] = field(default_factory=list)

    def cell(self, floors: int, cars: int, rate: float, scheduler: str) -> CellResult:
        for c in self.cells:
            if c.key == (floors, cars, rate, scheduler):
                return c
        raise KeyError((floors, cars, rate, scheduler))

    def reduction(self, challenger: str, baseline: str,
                  floors: int | None = None) -> dict:
        """Percent AWT reduction of `challenger` relative to `baseline`.

        Per cell: 100 * (awt_baseline - awt_challenger) / awt_baseline.
        The grand value is the mean of the per-cell reductions.
        """
        per_cell = {}
        for c in self.cells:
            if c.scheduler != baseline:
                continue
            if floors is not None and c.floors != floors:
                continue
            try:
                other = self.cell(c.floors, c.cars, c.rate, challenger)
            except KeyError:
                continue
            if c.awt_mean > 0:
                per_cell[(c.floors, c.cars, c.rate)] = \
                    100.0 * (c.awt_mean - other.awt_mean) / c.awt_mean
        grand = float(np.mean(list(per_cell.values()))) if per_cell else 0.0
        return {"cells": per_cell, "grand": grand}


def _run_task(task) -> tuple:
    cfg, floors, cars, rate, seed = task
    building = building_from_config(cfg, floors, cars)
    spec = TrafficSpec(cfg["traffic"]["pattern"], rate, cfg["traffic"]["duration"],
                       seed=traffic_seed(floors, rate, seed))
    base_traffic = generate(spec, building)
    out = []
    for name in cfg["schedulers"]:
        traffic = [Passenger(p.id, p.arrival_time, p.origin, p.destination)
                   for p in base_traffic]
        sim = Simulator(building, make_scheduler(name, building),
                        epoch_interval=cfg["epoch_interval"],
                        lock_threshold=cfg["lock_threshold"])
        try:
            stats = sim.run(traffic, horizon=cfg["traffic"]["duration"], seed=seed)
            out.append((name, stats.awt, stats.served, stats.unserved_at_end,
                        len(traffic), None))
        except Exception as exc:  # keep the grid alive; mark the cell invalid
            out.append((name, None, 0, len(traffic), len(traffic), repr(exc)))
    return (floors, cars, rate, seed, out)


def run_grid(config: dict | str | Path | None = None, jobs: int | None = None,
             progress: bool = False) -> ComparisonReport:
    """Run every (cell, seed, scheduler) simulation and aggregate."""
    cfg = load_config(config)
    grid = cfg["grid"]
    tasks = [(cfg, floors, cars, rate, seed)
             for floors in grid["floors"]
             for cars in grid["cars"]
             for rate in grid["rates"]
             for seed in cfg["seeds"]]
    jobs = jobs if jobs is not None else (os.cpu_count() or 1)
    results = []
    if jobs > 1 and len(tasks) > 1:
        with mp.get_context("fork").Pool(jobs) as pool:
            for k, r in enumerate(pool.imap_unordered(_run_task, tasks)):
                results.append(r)
                if progress and (k + 1) % 25 == 0:
                    print(f"  {k + 1}/{len(tasks)} cells done", flush=True)
    else:
        for k, task in enumerate(tasks):
            results.append(_run_task(task))
            if progress and (k + 1) % 25 == 0:
                print(f"  {k + 1}/{len(tasks)} cells done", flush=True)
    results.sort(key=lambda r: r[:4])

    grouped: dict[tuple, dict[int, list]] = {}
    for floors, cars, rate, seed, per_sched in results:
        grouped.setdefault((floors, cars, rate), {})[seed] = per_sched
    cells = []
    failures = []
    for (floors, cars, rate), by_seed in sorted(grouped.items()):
        for name in cfg["schedulers"]:
            awts, served, unserved, pax = [], 0, 0, 0
            for seed in sorted(by_seed):
                entry = next(e for e in by_seed[seed] if e[0] == name)
                _, awt, s, u, n, err = entry
                if err is not None:
                    failures.append({"floors": floors, "cars": cars, "rate": rate,
                                     "seed": seed, "scheduler": name, "error": err})
                    continue
                awts.append(awt)
                served += s
                unserved += u
                pax += n
            if awts:
                cells.append(CellResult(
                    floors=floors, cars=cars, rate=rate, scheduler=name,
                    awt_mean=float(np.mean(awts)), awt_std=float(np.std(awts)),
                    served=served, unserved=unserved, passengers=pax,
                    seed_awts=tuple(awts)))
    return ComparisonReport(config=cfg, cells=cells, failures=failures)


def emit(report: ComparisonReport, formats: Iterable[str],
         out_dir: str | Path) -> list[Path]:
    """Write the report as CSV, JSON and figure-ready plot data files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    formats = list(formats)
    if "csv" in formats:
        path = out / "report.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"# schema: {REPORT_SCHEMA}"])
            writer.writerow(["floors", "cars", "rate", "scheduler",
                             "awt_mean", "awt_std", "served"])
            for c in report.cells:
                writer.writerow([c.floors, c.cars, c.rate, c.scheduler,
                                 repr(c.awt_mean), repr(c.awt_std), c.served])
        written.append(path)
    if "json" in formats:
        path = out / "report.json"
        payload = {
            "schema": REPORT_SCHEMA,
            "config": report.config,
            "cells": [{
                "floors": c.floors, "cars": c.cars, "rate": c.rate,
                "scheduler": c.scheduler, "awt_mean": c.awt_mean,
                "awt_std": c.awt_std, "served": c.served,
                "unserved": c.unserved, "passengers": c.passengers,
                "seed_awts": list(c.seed_awts),
            } for c in report.cells],
            "failures": report.failures,
        }
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        written.append(path)
    if "plotdata" in formats:
        plot_dir = out / "plotdata"
        plot_dir.mkdir(exist_ok=True)
        grid = report.config["grid"]
        for challenger, baseline in report.config["comparisons"]:
            for floors in grid["floors"]:
                red = report.reduction(challenger, baseline, floors=floors)
                if not red["cells"]:
                    continue
                safe = f"{challenger}_vs_{baseline}".replace(":", "-")
                path = plot_dir / f"{safe}_f{floors}.csv"
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow([f"# schema: {REPORT_SCHEMA}-plot"])
                    writer.writerow(["rate"] + [f"cars{c}" for c in grid["cars"]])
                    for rate in grid["rates"]:
                        row = [rate]
                        for cars in grid["cars"]:
                            row.append(repr(red["cells"].get((floors, cars, rate), "")))
                        writer.writerow(row)
                written.append(path)
    return written


def parse_report_csv(path: str | Path) -> list[dict]:
    """Read back an emitted CSV report with exact float round-trip."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header_seen = False
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            if not header_seen:
                header_seen = True
                continue
            rows.append({
                "floors": int(row[0]), "cars": int(row[1]),
                "rate": float(row[2]), "scheduler": row[3],
                "awt_mean": float(row[4]), "awt_std": float(row[5]),
                "served": int(row[6]),
            })
    return rows
