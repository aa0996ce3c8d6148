"""Reference schedulers: group collective control and ETA assignment.

Collective control sends each hall call to the car with the smallest
sweep distance given its running direction. ETA assigns calls in press
order to the car with the earliest estimated arrival at the call floor,
computed with the same service-plan machinery the weight model uses and
accounting for calls already handed to that car earlier in the epoch.
"""
from __future__ import annotations

from dataclasses import dataclass

from .kinematics import stopping_distance
from .simulation import BuildingConfig, Scheduler, SubmodularGreedyScheduler
from .waiting_model import (
    CarSnapshot,
    Direction,
    HallCall,
    PlannedStop,
    WeightConfig,
    service_plan,
)

# degree-4 and degree-5 same-car penalties used by the benchmark variants
HIGHER_ORDER_45: tuple[tuple[int, float], ...] = ((4, 5.0), (5, 5.0))


@dataclass(frozen=True)
class SchedulerKind:
    """Named scheduler configuration.

    `unary` is the greedy scheduler with pairwise and higher-order terms
    forced to zero.
    """

    kind: str
    coincident_bonus: bool = True
    higher_order: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("greedy", "unary", "eta", "collective"):
            raise ValueError(f"unknown scheduler kind {self.kind!r}")
        if self.kind in ("eta", "collective") and (
                self.coincident_bonus is not True or self.higher_order):
            raise ValueError(f"{self.kind} takes no weight options")

    @property
    def label(self) -> str:
        opts = []
        if self.kind in ("greedy", "unary"):
            if not self.coincident_bonus:
                opts.append("nobonus")
            if self.higher_order:
                opts.append("ho45")
        return self.kind + (":" + ",".join(opts) if opts else "")


def parse_scheduler(spec: str) -> SchedulerKind:
    """Parse "kind[:opt,...]" with options nobonus, bonus, ho45, noho."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    bonus = True
    ho: tuple[tuple[int, float], ...] = ()
    for opt in filter(None, (o.strip() for o in rest.split(","))):
        if opt == "nobonus":
            bonus = False
        elif opt == "bonus":
            bonus = True
        elif opt == "ho45":
            ho = HIGHER_ORDER_45
        elif opt == "noho":
            ho = ()
        else:
            raise ValueError(f"unknown scheduler option {opt!r}")
    if kind in ("eta", "collective"):
        if rest:
            raise ValueError(f"{kind} takes no options")
        return SchedulerKind(kind)
    return SchedulerKind(kind, coincident_bonus=bonus, higher_order=ho)


def make_scheduler(kind: SchedulerKind | str, building: BuildingConfig) -> Scheduler:
    if isinstance(kind, str):
        kind = parse_scheduler(kind)
    if kind.kind == "greedy":
        s = SubmodularGreedyScheduler(building, pairwise=True,
                                      coincident_bonus=kind.coincident_bonus,
                                      higher_order=kind.higher_order)
    elif kind.kind == "unary":
        s = SubmodularGreedyScheduler(building, pairwise=False,
                                      coincident_bonus=kind.coincident_bonus,
                                      higher_order=())
    elif kind.kind == "eta":
        s = EtaScheduler(building)
    else:
        s = CollectiveScheduler()
    s.name = kind.label
    return s


def _sweep_distance(car: CarSnapshot, floor: int, direction: Direction,
                    building: BuildingConfig) -> float:
    """Travel distance (in floors) to reach the call within the car's sweep."""
    h = building.floor_height
    pos = car.kinematic.position / h + 1.0
    vel = car.kinematic.velocity
    sign = 0
    if vel:
        sign = 1 if vel > 0 else -1
    elif car.committed_direction is not None and car.car_calls:
        sign = car.committed_direction.sign
    if sign == 0:
        return abs(floor - pos)
    reach = pos
    if vel:
        reach = pos + sign * stopping_distance(vel, building.motion) / h
    ahead = (floor - reach) * sign >= -1e-9
    if ahead and direction.sign == sign:
        return abs(floor - pos)
    extent = [reach] + list(car.car_calls)
    if ahead:
        extent.append(floor)
    turn = max(extent) if sign > 0 else min(extent)
    return abs(turn - pos) + abs(turn - floor)


def collective_assign(calls, snapshots, building) -> dict[int, int]:
    """Nearest car by sweep distance, independently per call.

    Cars at capacity cannot board anyone and are not candidates; with every
    car full the call waits for a later epoch.
    """
    candidates = [car for car in snapshots if car.load < car.capacity]
    if not candidates:
        return {}
    out = {}
    for call in calls:
        best = min(candidates, key=lambda car: (
            _sweep_distance(car, call.floor, call.direction, building),
            car.car_index))
        out[call.id] = best.car_index
    return out


class CollectiveScheduler:
    """Group collective control baseline."""

    name = "collective"

    def assign(self, calls, snapshots, building):
        return collective_assign(calls, snapshots, building)


def eta_assign(calls, snapshots, building,
               weight_config: WeightConfig | None = None) -> dict[int, int]:
    """Earliest-arrival car per call, in press order, commitments included."""
    cfg = weight_config or WeightConfig(
        num_floors=building.floors,
        floor_height=building.floor_height,
        limits=building.motion,
        doors=building.doors,
        coincident_bonus=False,
        capacity_penalty=False,
    )
    candidates = [car for car in snapshots if car.load < car.capacity]
    if not candidates:
        return {}
    out: dict[int, int] = {}
    extras: dict[int, list[PlannedStop]] = {car.car_index: [] for car in candidates}
    for call in sorted(calls, key=lambda c: (c.press_time, c.id)):
        stop = PlannedStop(call.floor, call.direction, press_time=call.press_time)
        best_car = None
        best_eta = None
        for car in candidates:
            plan = extras[car.car_index] + [stop]
            eta = service_plan(car, plan, cfg)[-1]
            if best_eta is None or eta < best_eta - 1e-12:
                best_eta = eta
                best_car = car.car_index
        out[call.id] = best_car
        extras[best_car].append(stop)
    return out


class EtaScheduler:
    """Estimated-time-of-arrival baseline."""

    name = "eta"

    def __init__(self, building: BuildingConfig):
        self.weight_config = WeightConfig(
            num_floors=building.floors,
            floor_height=building.floor_height,
            limits=building.motion,
            doors=building.doors,
            coincident_bonus=False,
            capacity_penalty=False,
        )

    def assign(self, calls, snapshots, building):
        return eta_assign(calls, snapshots, building, self.weight_config)
