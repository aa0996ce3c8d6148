"""Discrete-event group-elevator world.

Cars run collective control over their registered destinations and
assigned hall calls, using the same stop-choice rules as the waiting
model. The scheduler is re-invoked on every new hall call and on a
periodic tick; assignments may move between cars until a car is about to
serve a call, at which point the call locks. Waiting time of a passenger
is measured from button press to the instant the doors finish opening
with the serving car present.

Event ordering at equal timestamps: passenger arrivals, then car and door
events, then scheduler epochs; FIFO within a class.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .kinematics import (
    DEFAULT_DOORS,
    DEFAULT_FLOOR_HEIGHT,
    DEFAULT_LIMITS,
    CarKinematicState,
    DoorPhase,
    DoorState,
    DoorTiming,
    MotionLimits,
    plan_from_motion,
    sample_profile,
    stopping_distance,
)
from .submodular import (
    AssignmentSet,
    GroundElement,
    Objective,
    PartitionMatroid,
    greedy_maximize,
)
from .waiting_model import (
    CarSnapshot,
    DestinationDistribution,
    Direction,
    HallCall,
    WeightConfig,
    build_weights,
    next_stop_floor,
)

_ARRIVAL, _CAR, _EPOCH = 0, 1, 2


@dataclass(frozen=True)
class BuildingConfig:
    """Static description of one building and its elevator group."""

    floors: int
    cars: int
    floor_height: float = DEFAULT_FLOOR_HEIGHT
    car_capacity: int = 10
    motion: MotionLimits = DEFAULT_LIMITS
    doors: DoorTiming = DEFAULT_DOORS
    population: int | None = None

    def __post_init__(self) -> None:
        if self.floors < 2:
            raise ValueError("need at least two floors")
        if self.cars < 1:
            raise ValueError("need at least one car")
        if self.car_capacity < 1:
            raise ValueError("capacity must be positive")

    @property
    def resolved_population(self) -> int:
        return self.population if self.population is not None else 10 * self.floors

    def floor_position(self, floor: int) -> float:
        return (floor - 1) * self.floor_height


@dataclass
class Passenger:
    """One rider: arrival (button press), trip endpoints, measured instants."""

    id: int
    arrival_time: float
    origin: int
    destination: int
    board_time: float | None = None
    alight_time: float | None = None

    def __post_init__(self) -> None:
        if self.origin == self.destination:
            raise ValueError("origin and destination must differ")

    @property
    def direction(self) -> Direction:
        return Direction.UP if self.destination > self.origin else Direction.DOWN


def measure_wait(passenger: Passenger) -> float:
    """Waiting time: button press to doors fully open with the car present."""
    if passenger.board_time is None:
        raise ValueError(f"passenger {passenger.id} has not boarded yet")
    return passenger.board_time - passenger.arrival_time


@dataclass(frozen=True)
class SimEvent:
    """One trace record."""

    time: float
    kind: str
    car: int | None = None
    floor: int | None = None
    call_id: int | None = None


@dataclass
class RunStats:
    """Measured outcome of one simulation run."""

    awt: float
    waits: tuple[float, ...]
    att: float
    served: int
    unserved_at_end: int
    empty: bool


@dataclass
class InitialCarState:
    """Starting condition for one car (used to freeze mid-service scenes)."""

    position: float = 0.0
    velocity: float = 0.0
    door: DoorState = DoorState(DoorPhase.CLOSED)
    committed: Direction | None = None
    onboard_destinations: tuple[int, ...] = ()

    def resolved_direction(self, floor_height: float) -> Direction | None:
        if self.committed is not None:
            return self.committed
        if self.velocity:
            return Direction.UP if self.velocity > 0 else Direction.DOWN
        if not self.onboard_destinations:
            return None
        fpos = self.position / floor_height + 1.0
        if all(d >= fpos - 1e-9 for d in self.onboard_destinations):
            return Direction.UP
        if all(d <= fpos + 1e-9 for d in self.onboard_destinations):
            return Direction.DOWN
        raise ValueError("onboard destinations straddle the car position; "
                         "give an explicit committed direction")


class Scheduler(Protocol):
    """Maps unlocked pending calls to cars, given frozen car snapshots."""

    def assign(self, calls: Sequence[HallCall], snapshots: Sequence[CarSnapshot],
               building: BuildingConfig) -> dict[int, int]:
        ...


class SubmodularGreedyScheduler:
    """Greedy maximization of the penalized waiting-time objective.

    Builds the weight tables each epoch, runs greedy over the partition
    matroid, then strips assignments that landed on capacity-flagged cars
    and re-runs greedy for just those calls on the remaining cars.
    """

    name = "greedy"

    def __init__(self, building: BuildingConfig, *, pairwise: bool = True,
                 coincident_bonus: bool = True,
                 higher_order: tuple[tuple[int, float], ...] = (),
                 dist: DestinationDistribution | None = None):
        self.weight_config = WeightConfig(
            num_floors=building.floors,
            floor_height=building.floor_height,
            limits=building.motion,
            doors=building.doors,
            coincident_bonus=coincident_bonus,
            pairwise_terms=pairwise,
            higher_order=higher_order,
        )
        self.dist = dist or DestinationDistribution.uniform(building.floors)

    def assign(self, calls, snapshots, building):
        if not calls:
            return {}
        ws = build_weights(snapshots, calls, self.dist, self.weight_config)
        objective = Objective(ws)
        matroid = PartitionMatroid(ws.n_calls, ws.n_cars)
        result = greedy_maximize(objective, matroid)
        flagged = set(np.flatnonzero(ws.capacity_flagged))
        placed = result.car_of()
        stripped = [i for i, car in placed.items() if car in flagged]
        if stripped and len(flagged) < ws.n_cars:
            kept = AssignmentSet.from_pairs(
                (i, car) for i, car in placed.items() if car not in flagged)
            forbidden = [GroundElement(i, car) for i in stripped for car in flagged]
            result = greedy_maximize(objective, matroid, fixed=kept,
                                     forbidden=forbidden)
            placed = result.car_of()
        elif stripped:
            for i in stripped:
                del placed[i]
        return {ws.call_ids[i]: snapshots[car].car_index
                for i, car in placed.items()}


class FixedScheduler:
    """Always returns the same call -> car map (frozen-scene testing)."""

    name = "fixed"

    def __init__(self, assignment: dict[int, int]):
        self.assignment = dict(assignment)

    def assign(self, calls, snapshots, building):
        return {c.id: self.assignment[c.id] for c in calls if c.id in self.assignment}


class _Car:
    __slots__ = ("index", "pos", "vel", "committed", "car_calls", "onboard",
                 "capacity", "leg_segments", "leg_start", "leg_p0", "leg_v0",
                 "leg_target", "leg_arrive", "leg_approach", "door_phase",
                 "door_started", "token", "stop_floor")

    def __init__(self, index: int, position: float, capacity: int):
        self.index = index
        self.pos = position
        self.vel = 0.0
        self.committed = 0
        self.car_calls: set[int] = set()
        self.onboard: list[Passenger] = []
        self.capacity = capacity
        self.leg_segments = None
        self.leg_start = 0.0
        self.leg_p0 = 0.0
        self.leg_v0 = 0.0
        self.leg_target = None
        self.leg_arrive = 0.0
        self.leg_approach = 0
        self.door_phase = DoorPhase.CLOSED
        self.door_started = 0.0
        self.token = 0
        self.stop_floor: int | None = None

    def kinematics_at(self, t: float) -> tuple[float, float]:
        if self.leg_segments is None:
            return self.pos, 0.0
        return sample_profile(self.leg_segments, self.leg_p0, self.leg_v0,
                              t - self.leg_start)


class Simulator:
    """Single-threaded event loop over one building, traffic and scheduler."""

    def __init__(self, building: BuildingConfig, scheduler: Scheduler, *,
                 epoch_interval: float = 1.0, lock_threshold: float = 3.0,
                 trace: Callable[[SimEvent], None] | list | None = None,
                 initial_cars: Sequence[InitialCarState] | None = None,
                 drain_limit: float = 7200.0):
        self.building = building
        self.scheduler = scheduler
        self.epoch_interval = epoch_interval
        self.lock_threshold = lock_threshold
        self.drain_limit = drain_limit
        if isinstance(trace, list):
            self._trace = trace.append
        else:
            self._trace = trace
        self._initial = initial_cars

    # -- event plumbing ----------------------------------------------------
    def _push(self, time: float, prio: int, kind: str, payload) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, prio, self._seq, kind, payload))

    def _emit(self, time, kind, car=None, floor=None, call_id=None):
        if self._trace is not None:
            self._trace(SimEvent(time, kind, car, floor, call_id))

    # -- run ----------------------------------------------------------------
    def run(self, traffic: Sequence[Passenger], horizon: float,
            seed: int = 0) -> RunStats:
        """Execute arrivals up to `horizon`, then drain all riders.

        Deterministic given (building, traffic, scheduler); `seed` is part
        of the interface for scenario bookkeeping but the engine itself
        draws no random numbers.
        """
        b = self.building
        last = -np.inf
        for p in traffic:
            if p.arrival_time < last:
                raise ValueError("traffic must be sorted by arrival time")
            last = p.arrival_time
            if not (1 <= p.origin <= b.floors and 1 <= p.destination <= b.floors):
                raise ValueError(f"passenger {p.id} travels outside the building")

        self._heap: list = []
        self._seq = 0
        self.now = 0.0
        self.calls: dict[tuple[int, Direction], HallCall] = {}
        self.queues: dict[tuple[int, Direction], list[Passenger]] = {}
        self._next_call_id = 0
        self._epoch_scheduled = -1.0
        self._last_epoch = -1.0
        self.cars = []
        dummy_id = -1
        for k in range(b.cars):
            init = (self._initial[k] if self._initial is not None
                    else InitialCarState())
            car = _Car(k, init.position, b.car_capacity)
            car.door_phase = init.door.phase
            car.door_started = -init.door.elapsed
            committed = init.resolved_direction(b.floor_height)
            car.committed = committed.sign if committed else 0
            for dest in init.onboard_destinations:
                rider = Passenger(dummy_id, 0.0, 1 if dest != 1 else 2, dest)
                rider.board_time = 0.0
                dummy_id -= 1
                car.onboard.append(rider)
                car.car_calls.add(dest)
            if init.velocity:
                car.vel = init.velocity
                self._start_initial_leg(car)
            else:
                car.stop_floor = self._floor_of(car.pos)
                if init.door.phase is not DoorPhase.CLOSED:
                    self._resume_door_cycle(car, init.door)
            self.cars.append(car)

        for p in traffic:
            self._push(p.arrival_time, _ARRIVAL, "arrival", p)
        self._schedule_epoch(0.0)

        limit = horizon + self.drain_limit
        while self._heap:
            time, prio, _, kind, payload = heapq.heappop(self._heap)
            if time > limit:
                break
            self.now = time
            if kind == "arrival":
                self._on_arrival(payload)
            elif kind == "car":
                self._on_car_event(payload)
            else:
                self._on_epoch()

        waits = tuple(measure_wait(p) for p in traffic if p.board_time is not None)
        served = len(waits)
        trips = [p.alight_time - p.arrival_time for p in traffic
                 if p.alight_time is not None]
        return RunStats(
            awt=float(np.mean(waits)) if waits else 0.0,
            waits=waits,
            att=float(np.mean(trips)) if trips else 0.0,
            served=served,
            unserved_at_end=len(traffic) - served,
            empty=not waits,
        )

    # -- helpers -------------------------------------------------------------
    def _floor_of(self, pos: float) -> int:
        return int(round(pos / self.building.floor_height)) + 1

    def _floor_pos(self, floor: int) -> float:
        return self.building.floor_position(floor)

    def _pickups_for(self, car: _Car) -> list[tuple[int, int, float]]:
        return [(call.floor, call.direction.sign, call.press_time)
                for call in self.calls.values() if call.assigned_car == car.index]

    def _start_initial_leg(self, car: _Car) -> None:
        """A car created in motion heads for its rules-chosen stop, or brakes
        at the nearest reachable floor; the first epoch retargets it
        according to its assignments."""
        b = self.building
        sign = 1 if car.vel > 0 else -1
        fpos = car.pos / b.floor_height + 1.0
        reach = fpos + sign * stopping_distance(car.vel, b.motion) / b.floor_height
        floor = next_stop_floor(fpos, sign, car.car_calls, [], reach=reach)
        if floor is None:
            floor = int(np.ceil(reach - 1e-9)) if sign > 0 else int(np.floor(reach + 1e-9))
            floor = max(1, min(b.floors, floor))
        self._begin_leg(car, floor)

    def _begin_leg(self, car: _Car, target: int) -> None:
        b = self.building
        segments = plan_from_motion(car.pos, car.vel, self._floor_pos(target),
                                    b.motion)
        car.leg_segments = segments
        car.leg_start = self.now
        car.leg_p0 = car.pos
        car.leg_v0 = car.vel
        car.leg_target = target
        car.leg_arrive = self.now + sum(s[0] for s in segments)
        car.stop_floor = None
        if car.vel:
            sign = 1 if car.vel > 0 else -1
            car.committed = sign
            ahead = (self._floor_pos(target) - car.pos) * sign
            braking = stopping_distance(car.vel, b.motion)
            car.leg_approach = sign if ahead >= braking - 1e-12 else -sign
        elif abs(self._floor_pos(target) - car.pos) > 1e-9:
            car.committed = 1 if self._floor_pos(target) > car.pos else -1
            car.leg_approach = car.committed
        else:
            car.leg_approach = car.committed
        car.token += 1
        self._push(car.leg_arrive, _CAR, "car", (car.index, car.token, "arrive"))
        self._emit(self.now, "depart", car=car.index, floor=target)

    def _resume_door_cycle(self, car: _Car, door: DoorState) -> None:
        timing = self.building.doors
        car.token += 1
        if door.phase is DoorPhase.OPENING:
            remaining = timing.open_time - door.elapsed
            stage = "open"
        elif door.phase is DoorPhase.OPEN:
            remaining = timing.dwell_time - door.elapsed
            stage = "dwell_end"
        else:
            remaining = timing.close_time - door.elapsed
            stage = "closed"
        self._push(self.now + remaining, _CAR, "car", (car.index, car.token, stage))

    def _schedule_epoch(self, time: float) -> None:
        if self._epoch_scheduled >= time:
            return
        self._epoch_scheduled = time
        self._push(time, _EPOCH, "epoch", None)

    # -- event handlers -------------------------------------------------------
    def _on_arrival(self, p: Passenger) -> None:
        key = (p.origin, p.direction)
        self.queues.setdefault(key, []).append(p)
        self._emit(self.now, "arrival", floor=p.origin, call_id=None)
        if key not in self.calls:
            call = HallCall(self._next_call_id, p.origin, p.direction,
                            press_time=self.now)
            self._next_call_id += 1
            self.calls[key] = call
            self._emit(self.now, "press", floor=p.origin, call_id=call.id)
        self._schedule_epoch(self.now)

    def _on_car_event(self, payload) -> None:
        index, token, stage = payload
        car = self.cars[index]
        if token != car.token:
            return
        if stage == "arrive":
            self._car_arrived(car)
        elif stage == "open":
            self._doors_fully_open(car)
        elif stage == "dwell_end":
            self._dwell_expired(car)
        else:
            self._doors_closed(car)

    def _car_arrived(self, car: _Car) -> None:
        target = car.leg_target
        # arrival direction is the leg's final approach (an overshoot leg
        # approaches from the other side of its starting motion)
        if car.leg_approach:
            car.committed = car.leg_approach
        car.pos = self._floor_pos(target)
        car.vel = 0.0
        car.leg_segments = None
        car.leg_target = None
        car.stop_floor = target
        self._emit(self.now, "stop", car=car.index, floor=target)
        serves_delivery = target in car.car_calls
        serves_pickup = any(call.floor == target and call.assigned_car == car.index
                            for call in self.calls.values())
        if serves_delivery or serves_pickup:
            self._open_doors(car)
        else:
            self._next_action(car)

    def _open_doors(self, car: _Car) -> None:
        car.door_phase = DoorPhase.OPENING
        car.door_started = self.now
        car.token += 1
        self._push(self.now + self.building.doors.open_time, _CAR, "car",
                   (car.index, car.token, "open"))

    def _doors_fully_open(self, car: _Car) -> None:
        floor = car.stop_floor
        car.door_phase = DoorPhase.OPEN
        car.door_started = self.now
        self._emit(self.now, "open", car=car.index, floor=floor)
        for p in [p for p in car.onboard if p.destination == floor]:
            p.alight_time = self.now
            car.onboard.remove(p)
            self._emit(self.now, "alight", car=car.index, floor=floor,
                       call_id=p.id)
        car.car_calls.discard(floor)
        self._board_at_stop(car, floor)
        car.token += 1
        self._push(self.now + self.building.doors.dwell_time, _CAR, "car",
                   (car.index, car.token, "dwell_end"))

    def _board_at_stop(self, car: _Car, floor: int) -> bool:
        """Boarding under the direction-then-adoption rule; True if anyone
        boarded. Registered destinations do not feed the adoption check."""
        base_calls = set(car.car_calls)
        dirn = car.committed
        boarded_any = False
        while True:
            here = [call for call in self.calls.values()
                    if call.floor == floor and call.assigned_car == car.index]
            if not here:
                break
            if dirn == 0:
                dirn = min(here, key=lambda c: (c.press_time, c.id)).direction.sign
            matched = [c for c in here if c.direction.sign == dirn]
            if matched:
                progressed = False
                for call in matched:
                    progressed |= self._board_call(car, call)
                if not progressed:
                    break
                boarded_any = True
                continue
            pickups = [(c.floor, c.direction.sign, c.press_time)
                       for c in self.calls.values()
                       if c.assigned_car == car.index]
            nxt = next_stop_floor(floor, dirn, base_calls, pickups)
            if nxt != floor:
                break
            dirn = min(here, key=lambda c: (c.press_time, c.id)).direction.sign
        car.committed = dirn
        return boarded_any

    def _board_call(self, car: _Car, call: HallCall) -> bool:
        key = (call.floor, call.direction)
        queue = self.queues.get(key, [])
        boarded = False
        while queue and len(car.onboard) < car.capacity:
            p = queue.pop(0)
            p.board_time = self.now
            car.onboard.append(p)
            if p.destination != call.floor:
                car.car_calls.add(p.destination)
            boarded = True
            self._emit(self.now, "board", car=car.index, floor=call.floor,
                       call_id=p.id)
        if not queue:
            del self.queues[key]
            del self.calls[key]
        else:
            call.press_time = queue[0].arrival_time
            call.assigned_car = None  # car is full; put the rest back up
        return boarded

    def _dwell_expired(self, car: _Car) -> None:
        if self._board_at_stop(car, car.stop_floor):
            # door holding: boarding demand arrived during the dwell
            car.token += 1
            self._push(self.now + self.building.doors.dwell_time, _CAR, "car",
                       (car.index, car.token, "dwell_end"))
            self._emit(self.now, "extend", car=car.index, floor=car.stop_floor)
            return
        car.door_phase = DoorPhase.CLOSING
        car.door_started = self.now
        car.token += 1
        self._push(self.now + self.building.doors.close_time, _CAR, "car",
                   (car.index, car.token, "closed"))

    def _doors_closed(self, car: _Car) -> None:
        car.door_phase = DoorPhase.CLOSED
        car.door_started = self.now
        self._emit(self.now, "close", car=car.index, floor=car.stop_floor)
        self._next_action(car)

    def _next_action(self, car: _Car) -> None:
        fpos = car.pos / self.building.floor_height + 1.0
        pickups = self._pickups_for(car)
        target = next_stop_floor(fpos, car.committed, car.car_calls, pickups)
        if target is None:
            car.committed = 0
            self._emit(self.now, "park", car=car.index,
                       floor=self._floor_of(car.pos))
            return
        if abs(self._floor_pos(target) - car.pos) < 1e-9:
            car.stop_floor = target
            self._open_doors(car)
            return
        self._begin_leg(car, target)

    def _retarget_moving(self, car: _Car) -> None:
        b = self.building
        pos, vel = car.kinematics_at(self.now)
        if vel == 0.0 or car.leg_arrive <= self.now + 1e-12:
            return
        sign = 1 if vel > 0 else -1
        fpos = pos / b.floor_height + 1.0
        reach = fpos + sign * stopping_distance(vel, b.motion) / b.floor_height
        # the committed stop is reachable by construction of the leg; the
        # plain braking estimate ignores the deceleration already under way
        if car.leg_target is not None and (car.leg_target - fpos) * sign >= 0:
            reach = min(reach, car.leg_target) if sign > 0 \
                else max(reach, car.leg_target)
        pickups = self._pickups_for(car)
        target = next_stop_floor(fpos, sign, car.car_calls, pickups, reach=reach)
        if target is None:
            # nothing left to serve: brake at the nearest reachable floor
            target = int(np.ceil(reach - 1e-9)) if sign > 0 \
                else int(np.floor(reach + 1e-9))
            target = max(1, min(b.floors, target))
        if target == car.leg_target:
            return
        car.pos, car.vel = pos, vel
        self._emit(self.now, "retarget", car=car.index, floor=target)
        self._begin_leg(car, target)

    # -- scheduler epoch -------------------------------------------------------
    def _snapshot(self, car: _Car) -> CarSnapshot:
        pos, vel = car.kinematics_at(self.now)
        if car.door_phase is DoorPhase.CLOSED:
            door = DoorState(DoorPhase.CLOSED)
        else:
            duration = {DoorPhase.OPENING: self.building.doors.open_time,
                        DoorPhase.OPEN: self.building.doors.dwell_time,
                        DoorPhase.CLOSING: self.building.doors.close_time}[car.door_phase]
            elapsed = min(self.now - car.door_started, duration)
            door = DoorState(car.door_phase, elapsed)
        sign = 0
        if vel:
            sign = 1 if vel > 0 else -1
        elif car.car_calls or car.committed:
            sign = car.committed
        committed = (Direction.UP if sign > 0
                     else Direction.DOWN if sign < 0 else None)
        return CarSnapshot(
            car_index=car.index,
            kinematic=CarKinematicState(position=pos, velocity=vel, door=door),
            committed_direction=committed,
            car_calls=frozenset(car.car_calls),
            load=len(car.onboard),
            capacity=car.capacity,
        )

    def _update_locks(self) -> None:
        for call in self.calls.values():
            if call.assigned_car is None:
                call.locked = False
                continue
            car = self.cars[call.assigned_car]
            serving_here = (car.door_phase is not DoorPhase.CLOSED
                            and car.stop_floor == call.floor)
            braking_in = (car.leg_target == call.floor
                          and car.leg_arrive - self.now <= self.lock_threshold)
            call.locked = serving_here or braking_in

    def _on_epoch(self) -> None:
        if self.now == self._last_epoch:
            return
        self._last_epoch = self.now
        self._update_locks()
        pending = list(self.calls.values())
        unlocked = [c for c in pending if not c.locked]
        if unlocked:
            snapshots = [self._snapshot(car) for car in self.cars]
            assignment = self.scheduler.assign(unlocked, snapshots, self.building)
            for call in unlocked:
                new = assignment.get(call.id)
                if new != call.assigned_car:
                    call.assigned_car = new
                    self._emit(self.now, "assign", car=new, floor=call.floor,
                               call_id=call.id)
            for car in self.cars:
                if car.leg_segments is not None:
                    self._retarget_moving(car)
                elif car.door_phase is DoorPhase.CLOSED:
                    has_work = car.car_calls or any(
                        c.assigned_car == car.index for c in self.calls.values())
                    parked = car.leg_segments is None and car.stop_floor is not None
                    if has_work and parked:
                        self._next_action(car)
        if self.calls or any(car.onboard for car in self.cars):
            self._schedule_epoch(self.now + self.epoch_interval)


def run(building: BuildingConfig, traffic: Sequence[Passenger],
        scheduler: Scheduler, horizon: float, seed: int = 0,
        **simulator_kwargs) -> RunStats:
    """One-shot convenience wrapper around Simulator.run."""
    sim = Simulator(building, scheduler, **simulator_kwargs)
    return sim.run(traffic, horizon, seed)


def car_next_action(snapshot: CarSnapshot, assigned_calls: Sequence[HallCall],
                    building: BuildingConfig) -> tuple[str, int | None]:
    """Collective-control decision for one car outside the event loop.

    Returns ("park", None), ("stop_at", floor), ("continue", floor) for a
    moving car whose next stop lies ahead, or ("reverse", floor).
    """
    h = building.floor_height
    pos = snapshot.kinematic.position / h + 1.0
    vel = snapshot.kinematic.velocity
    dirn = snapshot.committed_direction.sign if snapshot.committed_direction else 0
    reach = pos
    if vel:
        dirn = 1 if vel > 0 else -1
        reach = pos + (1 if vel > 0 else -1) * stopping_distance(
            vel, building.motion) / h
    pickups = [(c.floor, c.direction.sign, c.press_time) for c in assigned_calls]
    target = next_stop_floor(pos, dirn, snapshot.car_calls, pickups, reach=reach)
    if target is None:
        return "park", None
    if vel:
        return ("continue", target) if (target - reach) * dirn >= -1e-9 \
            else ("reverse", target)
    if dirn and (target - pos) * dirn < -1e-9:
        return "reverse", target
    return "stop_at", target
