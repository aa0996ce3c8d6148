"""Stochastic passenger arrival streams for the benchmark grid.

Arrivals follow a homogeneous Poisson process whose intensity comes from
the conventional rate figure: the percentage of the building population
requesting service per five minutes. Patterns: inter-floor trips avoid
the lobby entirely, up-peak starts at the lobby, down-peak ends there,
and mixed traffic composes the three with given weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .simulation import BuildingConfig, Passenger

TRAFFIC_SCHEMA = "liftsched-traffic-v1"

_PATTERNS = ("interfloor", "up_peak", "down_peak", "mixed")


@dataclass(frozen=True)
class TrafficSpec:
    """One arrival-stream recipe: pattern, rate and duration, plus seed."""

    pattern: str
    rate: float                     # percent of population per 5 minutes
    duration: float                 # seconds
    seed: int
    mixed_weights: tuple[float, float, float] = (0.45, 0.45, 0.10)
    # weights order: (down_peak, up_peak, interfloor)

    def __post_init__(self) -> None:
        if self.pattern not in _PATTERNS:
            raise ValueError(f"unknown traffic pattern {self.pattern!r}")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.pattern == "mixed":
            if abs(sum(self.mixed_weights) - 1.0) > 1e-9:
                raise ValueError("mixed weights must sum to 1")


def generate(spec: TrafficSpec, building: BuildingConfig) -> list[Passenger]:
    """Draw one passenger stream; deterministic per spec.seed."""
    population = building.resolved_population
    if population <= 0:
        raise ValueError("building population must be positive")
    floors = building.floors
    if spec.pattern in ("interfloor", "mixed") and floors < 3:
        raise ValueError("inter-floor traffic needs at least three floors")
    lam = (spec.rate / 100.0) * population / 300.0
    rng = np.random.default_rng(spec.seed)
    passengers = []
    t = 0.0
    pid = 0
    while True:
        gap = rng.exponential(1.0 / lam)
        t = np.nextafter(t, np.inf) if gap == 0.0 else t + gap
        if t >= spec.duration:
            break
        pattern = spec.pattern
        if pattern == "mixed":
            pattern = ("down_peak", "up_peak", "interfloor")[
                rng.choice(3, p=spec.mixed_weights)]
        origin, destination = _draw_trip(rng, pattern, floors)
        passengers.append(Passenger(pid, float(t), origin, destination))
        pid += 1
    return passengers


def _draw_trip(rng: np.random.Generator, pattern: str, floors: int) -> tuple[int, int]:
    if pattern == "up_peak":
        return 1, int(rng.integers(2, floors + 1))
    if pattern == "down_peak":
        return int(rng.integers(2, floors + 1)), 1
    # inter-floor: between different floors, never to or from the lobby
    origin = int(rng.integers(2, floors + 1))
    destination = int(rng.integers(2, floors))
    if destination >= origin:
        destination += 1
    return origin, destination


def save_traffic(path: str | Path, passengers: Sequence[Passenger]) -> None:
    """Pin a passenger list as line-delimited text for replays."""
    lines = [f"# schema: {TRAFFIC_SCHEMA}"]
    for p in passengers:
        lines.append(f"{p.id}\t{p.arrival_time!r}\t{p.origin}\t{p.destination}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_traffic(path: str | Path) -> list[Passenger]:
    """Read a pinned passenger list; exact float round-trip."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(f"# schema: {TRAFFIC_SCHEMA}"):
        raise ValueError("not a traffic pin file (missing schema header)")
    out = []
    for line in lines[1:]:
        if not line.strip() or line.startswith("#"):
            continue
        pid, arrival, origin, destination = line.split("\t")
        out.append(Passenger(int(pid), float(arrival), int(origin), int(destination)))
    return out
