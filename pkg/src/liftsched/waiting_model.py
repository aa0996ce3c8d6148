"""Waiting-time weight model for hall-call assignment.

Builds, for one scheduling epoch, the table of unary waiting estimates
(one hall call served alone), pairwise excess terms (two calls sharing a
car, destination of the first-served call taken in expectation), optional
higher-order load-balancing penalties, the coincident-call bonus, capacity
penalties, and the per-call feasibility penalties with their constant
offset.

All estimates come from a deterministic frozen-state service plan: the car
serves its existing car calls plus the candidate pickups under collective
order, and once empty applies, in order: keep direction while same-direction
calls lie ahead; otherwise run to the highest (lowest) floor holding an
opposite-direction call; otherwise run to the farthest same-direction call
behind and sweep back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .kinematics import (
    DEFAULT_DOORS,
    DEFAULT_FLOOR_HEIGHT,
    DEFAULT_LIMITS,
    CarKinematicState,
    DoorPhase,
    DoorTiming,
    MotionLimits,
    stopping_distance,
    travel_time_from_motion,
    travel_time_rest_to_rest,
)

_EPS = 1e-9


class Direction(Enum):
    UP = 1
    DOWN = -1

    @property
    def sign(self) -> int:
        return self.value

    @property
    def opposite(self) -> "Direction":
        return Direction.DOWN if self is Direction.UP else Direction.UP


@dataclass
class HallCall:
    """A pending pickup request: floor, direction and press instant."""

    id: int
    floor: int
    direction: Direction
    press_time: float
    assigned_car: int | None = None
    locked: bool = False


@dataclass(frozen=True)
class CarSnapshot:
    """Frozen kinematic, call-queue, door and load state of one car."""

    car_index: int
    kinematic: CarKinematicState
    committed_direction: Direction | None
    car_calls: frozenset[int]
    load: int
    capacity: int

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if not 0 <= self.load <= self.capacity:
            raise ValueError("load must lie in [0, capacity]")
        if self.car_calls and self.committed_direction is None:
            raise ValueError("car calls require a committed direction")


@dataclass(frozen=True)
class PlannedStop:
    """A pickup the service plan must make, with optional known destination."""

    floor: int
    direction: Direction
    destination: int | None = None
    press_time: float = 0.0


class DestinationDistribution:
    """Destination-floor probabilities per (origin floor, direction).

    The candidate set for (origin, direction) is every floor strictly
    beyond the origin in that direction; probabilities over it sum to one.
    """

    def __init__(self, num_floors: int,
                 table: dict[tuple[int, Direction], dict[int, float]] | None = None):
        if num_floors < 2:
            raise ValueError("need at least two floors")
        self.num_floors = num_floors
        self._table = {}
        self._cache: dict[tuple[int, Direction], list[tuple[int, float]]] = {}
        if table:
            for (origin, direction), probs in table.items():
                cands = set(self.candidates(origin, direction))
                if not cands:
                    raise ValueError(f"no destinations from {origin} going {direction}")
                if set(probs) - cands:
                    raise ValueError("probability table lists non-candidate floors")
                total = sum(probs.values())
                if abs(total - 1.0) > 1e-9:
                    raise ValueError("probabilities must sum to 1")
                self._table[(origin, direction)] = dict(probs)

    @classmethod
    def uniform(cls, num_floors: int) -> "DestinationDistribution":
        return cls(num_floors)

    @classmethod
    def point_mass(cls, num_floors: int,
                   targets: dict[tuple[int, Direction], int]) -> "DestinationDistribution":
        table = {key: {floor: 1.0} for key, floor in targets.items()}
        return cls(num_floors, table)

    def candidates(self, origin: int, direction: Direction) -> list[int]:
        if direction is Direction.UP:
            return list(range(origin + 1, self.num_floors + 1))
        return list(range(1, origin))

    def items(self, origin: int, direction: Direction) -> list[tuple[int, float]]:
        key = (origin, direction)
        cached = self._cache.get(key)
        if cached is None:
            if key in self._table:
                cached = sorted(self._table[key].items())
            else:
                cands = self.candidates(origin, direction)
                if not cands:
                    raise ValueError(f"no destinations from {origin} going {direction}")
                p = 1.0 / len(cands)
                cached = [(f, p) for f in cands]
            self._cache[key] = cached
        return cached


@dataclass(frozen=True)
class WeightConfig:
    """Parameters of the weight build for one building."""

    num_floors: int
    floor_height: float = DEFAULT_FLOOR_HEIGHT
    limits: MotionLimits = DEFAULT_LIMITS
    doors: DoorTiming = DEFAULT_DOORS
    coincident_bonus: bool = True
    bonus_fraction: float = 0.20
    bonus_cap: float = 10.0
    capacity_penalty: bool = True
    capacity_margin: int = 1
    penalty_large: float = 1e4
    higher_order: tuple[tuple[int, float], ...] = ()
    pairwise_terms: bool = True

    def __post_init__(self) -> None:
        if self.num_floors < 2:
            raise ValueError("need at least two floors")
        for k, penalty in self.higher_order:
            if k < 3:
                raise ValueError("higher-order terms start at degree 3")
            if penalty < 0:
                raise ValueError("higher-order penalties must be nonnegative")


@dataclass(frozen=True)
class HigherOrderTerm:
    """Penalty incurred when every call in `calls` rides car `car`."""

    car: int
    calls: frozenset[int]
    penalty: float


@dataclass
class WeightSet:
    """All weight tables for one scheduling epoch."""

    n_calls: int
    n_cars: int
    unary: np.ndarray            # (N, C), bonus and capacity penalty applied
    pairwise: np.ndarray         # (N, N, C), symmetric, zero diagonal
    higher_order: list[HigherOrderTerm]
    penalties: np.ndarray        # (N,), per-call feasibility penalty
    offset: float                # n_cars * penalties.sum()
    call_ids: tuple[int, ...]
    capacity_flagged: np.ndarray  # (C,) bool, cars at the capacity threshold


class _TravelTable:
    """Per-building rest-to-rest travel times between floor pairs."""

    def __init__(self, num_floors: int, floor_height: float, limits: MotionLimits):
        self.floor_height = floor_height
        self.limits = limits
        self.rest = [travel_time_rest_to_rest(k * floor_height, limits)
                     for k in range(num_floors)]

    def floors_to_stop(self, velocity: float) -> float:
        return stopping_distance(velocity, self.limits) / self.floor_height


@lru_cache(maxsize=64)
def _make_travel_table(num_floors: int, floor_height: float,
                       limits: MotionLimits) -> _TravelTable:
    return _TravelTable(num_floors, floor_height, limits)


def _travel_table(cfg: WeightConfig) -> _TravelTable:
    return _make_travel_table(cfg.num_floors, cfg.floor_height, cfg.limits)


class _CarPlanState:
    """Snapshot unpacked into plan-friendly scalars, with a first-leg cache."""

    __slots__ = ("fpos", "vel", "dirn", "door_phase", "door_elapsed",
                 "calls", "leg_cache")

    def __init__(self, car: CarSnapshot, cfg: WeightConfig):
        h = cfg.floor_height
        self.fpos = car.kinematic.position / h + 1.0
        self.vel = car.kinematic.velocity
        self.dirn = car.committed_direction.sign if car.committed_direction else 0
        self.door_phase = car.kinematic.door.phase
        self.door_elapsed = car.kinematic.door.elapsed
        self.calls = tuple(sorted(car.car_calls))
        self.leg_cache: dict[int, float] = {}
        if self.vel != 0:
            self.dirn = 1 if self.vel > 0 else -1
        for c in self.calls:
            if not 1 <= c <= cfg.num_floors:
                raise ValueError(f"car call {c} outside building")
        # destinations behind the committed direction are legitimate after a
        # stop boards both directions; the reversal sweep picks them up

    def first_leg(self, target: int, cfg: WeightConfig, table: _TravelTable) -> float:
        cached = self.leg_cache.get(target)
        if cached is not None:
            return cached
        h = cfg.floor_height
        if self.vel == 0.0:
            delta = abs(target - self.fpos)
            rounded = round(delta)
            if abs(delta - rounded) < 1e-9:
                t = table.rest[int(rounded)]
            else:
                t = travel_time_rest_to_rest(delta * h, cfg.limits)
        else:
            state = CarKinematicState(position=(self.fpos - 1.0) * h,
                                      velocity=self.vel)
            t = travel_time_from_motion(state, (target - 1.0) * h, cfg.limits)
        self.leg_cache[target] = t
        return t


def next_stop_floor(position: float, direction: int, car_calls: Iterable[int],
                    pickups: Iterable[tuple[int, int, float]],
                    reach: float | None = None) -> int | None:
    """Next floor a collectively-controlled car stops at, or None to park.

    `position` is the car's location in (fractional) floor units; `reach`
    is the earliest floor a moving car could still brake for and gates
    which stops count as ahead (defaults to `position` for a car at
    rest). `direction` is +1 / -1 / 0 (idle); `pickups` are (floor,
    direction sign, press time) triples. Serves destinations and
    same-direction pickups ahead first; once nothing is ahead, runs to the
    farthest opposite-direction pickup ahead (the reversal landing), then
    sweeps back through whatever lies behind, then restarts from the far
    end of the remaining same-direction pickups. An idle car turns toward
    the nearest pickup (earliest press on ties) and then follows the same
    directional rules, so the choice survives once in motion.
    """
    if reach is None:
        reach = position
    if direction == 0:
        nearest = None
        if pickups:
            best_key = None
            for f, d, press in pickups:
                key = (abs(f - position), press, f, -d)
                if best_key is None or key < best_key:
                    best_key = key
                    nearest = f
        elif car_calls:
            nearest = min(car_calls, key=lambda c: abs(c - position))
        if nearest is None:
            return None
        if abs(nearest - position) < 1e-9:
            return nearest
        direction = 1 if nearest > position else -1
    # forward sweep: nearest delivery or same-direction pickup still ahead
    best = None
    best_dist = math.inf
    for c in car_calls:
        if (c - reach) * direction < -_EPS:
            continue
        dist = (c - position) * direction
        if dist < best_dist:
            best, best_dist = c, dist
    for f, d, _ in pickups:
        if d != direction or (f - reach) * direction < -_EPS:
            continue
        dist = (f - position) * direction
        if dist < best_dist:
            best, best_dist = f, dist
    if best is not None:
        return best
    # reversal landing: farthest opposite-direction pickup ahead; the reverse
    # sweep then collects everything on the way back
    turn = None
    for f, d, _ in pickups:
        if d == -direction and (f - reach) * direction >= -_EPS:
            if turn is None or (f - turn) * direction > 0:
                turn = f
    if turn is not None:
        return turn
    # reverse sweep: nearest delivery or now-matching pickup no longer ahead
    back = None
    for c in car_calls:
        if (c - reach) * direction < -_EPS:
            if back is None or (c - back) * direction > 0:
                back = c
    for f, d, _ in pickups:
        if d == -direction and (f - reach) * direction < -_EPS:
            if back is None or (f - back) * direction > 0:
                back = f
    if back is not None:
        return back
    # only same-direction pickups behind remain: run to the far end of the
    # next forward sweep
    far = None
    for f, d, _ in pickups:
        if d == direction:
            if far is None or (f - far) * direction < 0:
                far = f
    if far is not None:
        return far
    calls = list(car_calls)
    if calls:
        return min(calls, key=lambda c: abs(c - position))
    return None


class _PlanCursor:
    """Mutable mid-plan state, resumable after the first pickup boards."""

    __slots__ = ("t", "fpos", "dirn", "calls", "pending")

    def __init__(self, t, fpos, dirn, calls, pending):
        self.t = t
        self.fpos = fpos
        self.dirn = dirn
        self.calls = calls
        self.pending = pending

    def clone(self) -> "_PlanCursor":
        return _PlanCursor(self.t, self.fpos, self.dirn, set(self.calls),
                           [list(p) for p in self.pending])


def _serve_stop(floor: int, dirn: int, calls: set, pending: list,
                board: dict, open_at: float) -> tuple[int, list]:
    """Boarding at a stop: pickups matching the departure direction board;
    when the movement rules re-target this same floor (reversal landing,
    idle arrival, nothing left elsewhere) the car adopts the waiting call's
    direction and boards it too.

    Destinations registered by passengers boarding at this stop do not
    influence the adoption decision. Returns (new direction, remaining
    pending list); mutates `calls` and `board`.
    """
    calls.discard(floor)
    here = [p for p in pending if p[0] == floor]
    if not here:
        return dirn, pending
    base_calls = set(calls)
    while here:
        if dirn:
            matched = [p for p in here if p[1] == dirn]
            if matched:
                for p in matched:
                    board[p[4]] = open_at
                    if p[2]:
                        calls.add(p[2])
                here = [p for p in here if p[1] != dirn]
                pending = [p for p in pending
                           if not (p[0] == floor and p[1] == dirn)]
                continue
            nxt = next_stop_floor(floor, dirn, base_calls,
                                  [(p[0], p[1], p[3]) for p in pending])
            if nxt != floor:
                break
        dirn = min(here, key=lambda p: (p[3], p[4]))[1]
    return dirn, pending


def _run_plan(state: _CarPlanState, pickups: list[list], cfg: WeightConfig,
              table: _TravelTable, until_first: bool = False):
    """Serve `pickups` (entries [floor, dir, dest, press, idx]) from a frozen car state.

    Returns (board_times dict idx -> t, cursor); cursor is the state right
    after the stop at which the first pickup boarded (None when the plan
    ran to completion before any board, which cannot happen with pickups).
    """
    doors = cfg.doors
    board: dict[int, float] = {}
    t = 0.0
    fpos = state.fpos
    vel = state.vel
    dirn = state.dirn
    calls = set(state.calls)
    pending = pickups

    # Door preamble: a mid-cycle stop can serve co-located pickups and
    # must finish before the car moves.
    phase = state.door_phase
    if phase is not DoorPhase.CLOSED:
        here = round(fpos)
        if phase is DoorPhase.CLOSING:
            # finish the cycle; a fresh stop reopens later if needed
            t = doors.close_time - state.door_elapsed
        else:
            if phase is DoorPhase.OPENING:
                open_in = doors.open_time - state.door_elapsed
            else:
                # late joiners board when the dwell expires, which then
                # extends the dwell by one period
                open_in = doors.dwell_time - state.door_elapsed
            dirn, pending = _serve_stop(here, dirn, calls, pending, board, open_in)
            boarded_now = bool(board)
            if phase is DoorPhase.OPENING:
                depart = open_in + doors.dwell_time + doors.close_time
            else:
                depart = open_in + (doors.dwell_time if boarded_now else 0.0) \
                    + doors.close_time
            if not pending:
                return board, None
            if boarded_now and until_first:
                return board, _PlanCursor(depart, float(here), dirn, calls,
                                          [list(p) for p in pending])
            t = depart

    cursor = _PlanCursor(t, fpos, dirn, calls, pending)
    return _continue_plan(board, cursor, state, vel, cfg, table, until_first)


def _continue_plan(board: dict[int, float], cur: _PlanCursor, state: _CarPlanState | None,
                   vel: float, cfg: WeightConfig, table: _TravelTable,
                   until_first: bool = False):
    """Drive the service loop from a cursor; `vel` nonzero only on entry."""
    doors = cfg.doors
    t, fpos, dirn = cur.t, cur.fpos, cur.dirn
    calls, pending = cur.calls, cur.pending
    first_board = not board
    picks = [(p[0], p[1], p[3]) for p in pending]
    while pending:
        if vel != 0.0:
            eff = fpos + math.copysign(table.floors_to_stop(vel), vel)
        else:
            eff = fpos
        target = next_stop_floor(fpos, dirn, calls, picks, reach=eff)
        if target is None:
            break
        if not 1 <= target <= cfg.num_floors:
            raise ValueError(f"stop floor {target} outside building")
        if vel != 0.0:
            t += state.first_leg(target, cfg, table)
            # final approach opposes the motion when the stop cannot be
            # reached by braking forward (overshoot or behind)
            s = 1 if vel > 0 else -1
            ahead = (target - fpos) * s * cfg.floor_height
            dirn = s if ahead >= stopping_distance(vel, cfg.limits) - 1e-12 else -s
            vel = 0.0
        else:
            delta = abs(target - fpos)
            rounded = round(delta)
            if abs(delta - rounded) < 1e-9:
                t += table.rest[int(rounded)]
            else:
                t += travel_time_rest_to_rest(delta * cfg.floor_height, cfg.limits)
            if abs(target - fpos) > 1e-9:
                dirn = 1 if target > fpos else -1
        fpos = float(target)
        before = len(board)
        dirn, pending = _serve_stop(target, dirn, calls, pending, board,
                                    t + doors.open_time)
        boarded_any = len(board) > before
        if boarded_any:
            picks = [(p[0], p[1], p[3]) for p in pending]
        if pending:
            t += doors.full_cycle
        if boarded_any and first_board:
            if until_first:
                return board, _PlanCursor(t, fpos, dirn, calls,
                                          [list(p) for p in pending])
            first_board = False
    return board, None


def _pickups_from_stops(stops: Sequence[PlannedStop], cfg: WeightConfig) -> list[list]:
    out = []
    for idx, s in enumerate(stops):
        if not 1 <= s.floor <= cfg.num_floors:
            raise ValueError(f"stop floor {s.floor} outside building")
        if s.destination is not None and s.destination == s.floor:
            raise ValueError("destination must differ from the pickup floor")
        out.append([s.floor, s.direction.sign, s.destination or 0, s.press_time, idx])
    return out


def service_plan(car: CarSnapshot, stops: Sequence[PlannedStop],
                 cfg: WeightConfig) -> list[float]:
    """Board instants (doors fully open at the pickup floor) for each stop."""
    state = _CarPlanState(car, cfg)
    table = _travel_table(cfg)
    pickups = _pickups_from_stops(stops, cfg)
    board, _ = _run_plan(state, pickups, cfg, table)
    return [board[i] for i in range(len(stops))]


def unary_weight(car: CarSnapshot, call: HallCall, cfg: WeightConfig) -> float:
    """Waiting estimate for `car` to serve `call` alone, other calls ignored."""
    stop = PlannedStop(call.floor, call.direction, press_time=call.press_time)
    return service_plan(car, [stop], cfg)[0]


def pairwise_weight(car: CarSnapshot, call_i: HallCall, call_j: HallCall,
                    dist: DestinationDistribution, cfg: WeightConfig) -> float:
    """Expected excess waiting when both calls ride `car` together.

    The first-served call's unknown destination is averaged over the
    distribution; service order follows the movement rules.
    """
    if call_i.id == call_j.id or (call_i.floor == call_j.floor
                                  and call_i.direction == call_j.direction):
        raise ValueError("pairwise term needs two distinct hall calls")
    state = _CarPlanState(car, cfg)
    table = _travel_table(cfg)
    w_i = _solo_time(state, call_i, cfg, table)
    w_j = _solo_time(state, call_j, cfg, table)
    joint = _joint_expected_total(state, call_i, call_j, dist, cfg, table)
    return joint - w_i - w_j


def _solo_time(state: _CarPlanState, call: HallCall, cfg: WeightConfig,
               table: _TravelTable) -> float:
    pickups = [[call.floor, call.direction.sign, 0, call.press_time, 0]]
    board, _ = _run_plan(state, pickups, cfg, table)
    return board[0]


def _joint_expected_total(state: _CarPlanState, call_i: HallCall, call_j: HallCall,
                          dist: DestinationDistribution, cfg: WeightConfig,
                          table: _TravelTable) -> float:
    pickups = [
        [call_i.floor, call_i.direction.sign, 0, call_i.press_time, 0],
        [call_j.floor, call_j.direction.sign, 0, call_j.press_time, 1],
    ]
    board, cursor = _run_plan(state, pickups, cfg, table, until_first=True)
    if len(board) == 2:
        return board[0] + board[1]
    (first_idx, t_first), = board.items()
    first_call = call_i if first_idx == 0 else call_j
    total = 0.0
    for dest, prob in dist.items(first_call.floor, first_call.direction):
        resumed = cursor.clone()
        resumed.calls.add(dest)
        sub_board = dict(board)
        sub_board, _ = _continue_plan(sub_board, resumed, None, 0.0, cfg, table)
        total += prob * (t_first + sub_board[1 - first_idx])
    return total


def apply_coincident_bonus(w: float, coincident: bool, fraction: float = 0.20,
                           cap: float = 10.0) -> float:
    """Reduce a unary weight when the car already stops at the call floor."""
    if w < 0:
        raise ValueError("weight must be nonnegative")
    if not coincident:
        return w
    return w - min(fraction * w, cap)


def capacity_penalty(car: CarSnapshot, cfg: WeightConfig) -> float:
    """Large unary surcharge for cars at the capacity threshold."""
    if not cfg.capacity_penalty:
        return 0.0
    threshold = car.capacity - cfg.capacity_margin
    return cfg.penalty_large if car.load >= threshold else 0.0


def higher_order_terms(config: Sequence[tuple[int, float]]):
    """Generator factory for uniform same-car penalties of degree k >= 3."""
    for k, penalty in config:
        if k < 3:
            raise ValueError("higher-order terms start at degree 3")
        if penalty < 0:
            raise ValueError("higher-order penalties must be nonnegative")

    def generate(n_calls: int, n_cars: int):
        for k, penalty in config:
            if penalty == 0 or k > n_calls:
                continue
            for car in range(n_cars):
                for subset in combinations(range(n_calls), k):
                    yield HigherOrderTerm(car, frozenset(subset), penalty)

    return generate


def build_weights(cars: Sequence[CarSnapshot], calls: Sequence[HallCall],
                  dist: DestinationDistribution, cfg: WeightConfig) -> WeightSet:
    """Construct the full weight set for one epoch."""
    n, c = len(calls), len(cars)
    if n < 1 or c < 1:
        raise ValueError("need at least one call and one car")
    seen = set()
    for call in calls:
        key = (call.floor, call.direction)
        if key in seen:
            raise ValueError(f"duplicate hall call at floor {call.floor}")
        seen.add(key)
        if not 1 <= call.floor <= cfg.num_floors:
            raise ValueError(f"call floor {call.floor} outside building")
        if call.direction is Direction.UP and call.floor == cfg.num_floors:
            raise ValueError("up call on the top floor")
        if call.direction is Direction.DOWN and call.floor == 1:
            raise ValueError("down call on the lobby floor")

    table = _travel_table(cfg)
    unary = np.zeros((n, c))
    pairwise = np.zeros((n, n, c))
    flagged = np.zeros(c, dtype=bool)
    honest = np.zeros((n, c))
    for ci, car in enumerate(cars):
        state = _CarPlanState(car, cfg)
        surcharge = capacity_penalty(car, cfg)
        flagged[ci] = surcharge > 0
        solos = [_solo_time(state, call, cfg, table) for call in calls]
        for i, call in enumerate(calls):
            w = solos[i]
            if cfg.coincident_bonus and call.floor in car.car_calls:
                w = apply_coincident_bonus(w, True, cfg.bonus_fraction, cfg.bonus_cap)
            honest[i, ci] = w
            unary[i, ci] = w + surcharge
        if cfg.pairwise_terms:
            for i, j in combinations(range(n), 2):
                w = _joint_expected_total(state, calls[i], calls[j], dist, cfg, table)
                w -= solos[i] + solos[j]
                # nonnegative by construction: rare transient car states can
                # make the shared plan beat the solo plans, which the
                # objective must not reward
                pairwise[i, j, ci] = pairwise[j, i, ci] = max(w, 0.0)

    pair_sums = pairwise.sum(axis=1)          # (N, C)
    penalties = (unary + pair_sums).max(axis=1)
    honest_p = (honest + pair_sums).max(axis=1)
    if cfg.capacity_penalty and flagged.any():
        worst = honest_p.max() if n else 0.0
        if cfg.penalty_large <= worst:
            raise AssertionError(
                f"capacity surcharge {cfg.penalty_large} does not dominate "
                f"honest penalty {worst}")
    ho = list(higher_order_terms(cfg.higher_order)(n, c))
    return WeightSet(
        n_calls=n,
        n_cars=c,
        unary=unary,
        pairwise=pairwise,
        higher_order=ho,
        penalties=penalties,
        offset=c * float(penalties.sum()),
        call_ids=tuple(call.id for call in calls),
        capacity_flagged=flagged,
    )
