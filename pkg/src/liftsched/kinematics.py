"""Jerk-limited car motion and door-cycle timing primitives.

Travel times follow the 7-phase S-curve profile (jerk ramp, constant
acceleration, jerk ramp, cruise, then the mirrored deceleration), with the
usual analytic case split depending on whether rated speed and maximum
acceleration are reached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class MotionLimits:
    """Rated speed (m/s), max acceleration (m/s^2) and max jerk (m/s^3)."""

    rated_speed: float
    max_accel: float
    max_jerk: float

    def __post_init__(self) -> None:
        if self.rated_speed <= 0 or self.max_accel <= 0 or self.max_jerk <= 0:
            raise ValueError("motion limits must all be strictly positive")


@dataclass(frozen=True)
class DoorTiming:
    """Door opening, dwell and closing durations in seconds."""

    open_time: float
    dwell_time: float
    close_time: float

    def __post_init__(self) -> None:
        if min(self.open_time, self.dwell_time, self.close_time) < 0:
            raise ValueError("door phase durations must be nonnegative")

    @property
    def full_cycle(self) -> float:
        return self.open_time + self.dwell_time + self.close_time


class DoorPhase(Enum):
    CLOSED = "closed"
    OPENING = "opening"
    OPEN = "open"
    CLOSING = "closing"


@dataclass(frozen=True)
class DoorState:
    """Door phase plus seconds elapsed within that phase."""

    phase: DoorPhase = DoorPhase.CLOSED
    elapsed: float = 0.0

    def __post_init__(self) -> None:
        if self.elapsed < 0:
            raise ValueError("elapsed must be nonnegative")


DOORS_CLOSED = DoorState(DoorPhase.CLOSED)


@dataclass(frozen=True)
class CarKinematicState:
    """Position along the hoistway (m), signed velocity (m/s), door state."""

    position: float
    velocity: float = 0.0
    door: DoorState = DOORS_CLOSED

    def __post_init__(self) -> None:
        if self.position < 0:
            raise ValueError("position must be nonnegative")
        if self.velocity != 0.0 and self.door.phase is not DoorPhase.CLOSED:
            raise ValueError("car cannot move with doors not closed")


# Artifact defaults for a typical mid-rise installation.
DEFAULT_FLOOR_HEIGHT = 3.5
DEFAULT_LIMITS = MotionLimits(rated_speed=1.6, max_accel=1.0, max_jerk=1.6)
DEFAULT_DOORS = DoorTiming(open_time=2.0, dwell_time=3.0, close_time=3.0)


def _ramp_time(dv: float, limits: MotionLimits) -> float:
    """Time to change speed by dv >= 0 with zero acceleration at both ends."""
    a, j = limits.max_accel, limits.max_jerk
    if dv <= a * a / j:
        return 2.0 * math.sqrt(dv / j)
    return dv / a + a / j


def _ramp_dist(v0: float, v1: float, limits: MotionLimits) -> float:
    # Acceleration is symmetric in time over the ramp, so the mean speed is
    # the mean of the endpoint speeds.
    return 0.5 * (v0 + v1) * _ramp_time(abs(v1 - v0), limits)


def stopping_time(speed: float, limits: MotionLimits) -> float:
    """Time to brake from |speed| to rest with a jerk-limited ramp."""
    return _ramp_time(abs(speed), limits)


def stopping_distance(speed: float, limits: MotionLimits) -> float:
    """Distance covered while braking from |speed| to rest."""
    return _ramp_dist(abs(speed), 0.0, limits)


def travel_time_rest_to_rest(distance: float, limits: MotionLimits) -> float:
    """Minimum time of an S-curve move of `distance` meters, rest to rest.

    Three regimes: rated speed reached; max acceleration reached but not
    rated speed; neither (pure jerk ramps).
    """
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    if distance == 0:
        return 0.0
    v, a, j = limits.rated_speed, limits.max_accel, limits.max_jerk
    d_full = v * _ramp_time(v, limits)
    if distance >= d_full:
        return 2.0 * _ramp_time(v, limits) + (distance - d_full) / v
    v_sat = a * a / j
    d_sat = 2.0 * a ** 3 / (j * j)
    if v_sat < v and distance > d_sat:
        # accel saturates: v_p^2/a + v_p*a/j = d
        v_p = 0.5 * (-v_sat + math.sqrt(v_sat * v_sat + 4.0 * distance * a))
        return 2.0 * (v_p / a + a / j)
    v_p = (distance * distance * j / 4.0) ** (1.0 / 3.0)
    return 4.0 * math.sqrt(v_p / j)


def _peak_speed_rest_to_rest(distance: float, limits: MotionLimits) -> float:
    v, a, j = limits.rated_speed, limits.max_accel, limits.max_jerk
    d_full = v * _ramp_time(v, limits)
    if distance >= d_full:
        return v
    v_sat = a * a / j
    d_sat = 2.0 * a ** 3 / (j * j)
    if v_sat < v and distance > d_sat:
        return 0.5 * (-v_sat + math.sqrt(v_sat * v_sat + 4.0 * distance * a))
    return (distance * distance * j / 4.0) ** (1.0 / 3.0)


def _ramp_segments(dv: float, limits: MotionLimits, sign: float) -> list[tuple[float, float]]:
    """Jerk segments for a speed change of dv >= 0; `sign` +1 speeds up."""
    a, j = limits.max_accel, limits.max_jerk
    if dv <= 0:
        return []
    if dv <= a * a / j:
        t_j = math.sqrt(dv / j)
        t_const = 0.0
    else:
        t_j = a / j
        t_const = dv / a - a / j
    out = [(t_j, sign * j)]
    if t_const > 0:
        out.append((t_const, 0.0))
    out.append((t_j, -sign * j))
    return out


def plan_rest_to_rest(distance: float, limits: MotionLimits) -> list[tuple[float, float]]:
    """(duration, jerk) segments for a forward rest-to-rest move."""
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    if distance == 0:
        return []
    v_p = _peak_speed_rest_to_rest(distance, limits)
    segments = _ramp_segments(v_p, limits, 1.0)
    cruise = distance - 2.0 * _ramp_dist(0.0, v_p, limits)
    if cruise > 1e-12 * max(1.0, distance):
        segments.append((cruise / v_p, 0.0))
    segments.extend(_ramp_segments(v_p, limits, -1.0))
    return segments


def _peak_speed_from_motion(v0: float, distance: float, limits: MotionLimits) -> float:
    """Peak speed of the accelerate/cruise/brake profile from speed v0."""
    def covered(v_p: float) -> float:
        return _ramp_dist(v0, v_p, limits) + _ramp_dist(v_p, 0.0, limits)

    v = limits.rated_speed
    if covered(v) <= distance:
        return v
    lo, hi = v0, v
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if covered(mid) <= distance:
            lo = mid
        else:
            hi = mid
    return lo


def travel_time_from_motion(state: CarKinematicState, target: float,
                            limits: MotionLimits) -> float:
    """Time for a possibly-moving car to come to rest exactly at `target`.

    A car moving toward the target extends its profile; a car moving away
    or unable to brake in time stops first, then runs rest-to-rest.
    """
    d = target - state.position
    if state.velocity == 0.0:
        return travel_time_rest_to_rest(abs(d), limits)
    v0 = abs(state.velocity)
    if v0 > limits.rated_speed * (1 + 1e-9):
        raise ValueError("velocity exceeds rated speed")
    v0 = min(v0, limits.rated_speed)
    ahead = d if state.velocity > 0 else -d
    t_stop = _ramp_time(v0, limits)
    d_stop = _ramp_dist(v0, 0.0, limits)
    if ahead < d_stop:
        return t_stop + travel_time_rest_to_rest(abs(d_stop - ahead), limits)
    v_p = _peak_speed_from_motion(v0, ahead, limits)
    t = _ramp_time(v_p - v0, limits) + _ramp_time(v_p, limits)
    cruise = ahead - _ramp_dist(v0, v_p, limits) - _ramp_dist(v_p, 0.0, limits)
    if cruise > 0:
        t += cruise / v_p
    return t


def plan_from_motion(position: float, velocity: float, target: float,
                     limits: MotionLimits) -> list[tuple[float, float]]:
    """(duration, jerk) segments realizing travel_time_from_motion."""
    d = target - position
    if velocity == 0.0:
        sign = 1.0 if d >= 0 else -1.0
        return [(t, sign * jk) for t, jk in plan_rest_to_rest(abs(d), limits)]
    s = 1.0 if velocity > 0 else -1.0
    v0 = min(abs(velocity), limits.rated_speed)
    ahead = d * s
    d_stop = _ramp_dist(v0, 0.0, limits)
    if ahead < d_stop:
        segments = [(t, s * jk) for t, jk in _ramp_segments(v0, limits, -1.0)]
        back = d_stop - ahead
        segments.extend((t, -s * jk) for t, jk in plan_rest_to_rest(back, limits))
        return segments
    v_p = _peak_speed_from_motion(v0, ahead, limits)
    segments = [(t, s * jk) for t, jk in _ramp_segments(v_p - v0, limits, 1.0)]
    cruise = ahead - _ramp_dist(v0, v_p, limits) - _ramp_dist(v_p, 0.0, limits)
    if cruise > 1e-12 * max(1.0, ahead):
        segments.append((cruise / v_p, 0.0))
    segments.extend((t, s * jk) for t, jk in _ramp_segments(v_p, limits, -1.0))
    return segments


def sample_profile(segments: list[tuple[float, float]], p0: float, v0: float,
                   t: float) -> tuple[float, float]:
    """Position and velocity at time t along a segment profile (a0 = 0)."""
    p, v, a = p0, v0, 0.0
    for duration, jerk in segments:
        dt = duration if t >= duration else t
        p += v * dt + 0.5 * a * dt * dt + jerk * dt ** 3 / 6.0
        v += a * dt + 0.5 * jerk * dt * dt
        a += jerk * dt
        t -= dt
        if t <= 0:
            break
    return p, v


def door_cycle_remaining(timing: DoorTiming, door: DoorState) -> float:
    """Seconds until doors are fully closed, following open->dwell->close."""
    phase, elapsed = door.phase, door.elapsed
    if phase is DoorPhase.CLOSED:
        if elapsed != 0:
            raise ValueError("closed doors carry no elapsed time")
        return 0.0
    if phase is DoorPhase.OPENING:
        if elapsed > timing.open_time:
            raise ValueError("elapsed exceeds opening duration")
        return (timing.open_time - elapsed) + timing.dwell_time + timing.close_time
    if phase is DoorPhase.OPEN:
        if elapsed > timing.dwell_time:
            raise ValueError("elapsed exceeds dwell duration")
        return (timing.dwell_time - elapsed) + timing.close_time
    if elapsed > timing.close_time:
        raise ValueError("elapsed exceeds closing duration")
    return timing.close_time - elapsed


def time_to_doors_open(timing: DoorTiming, door: DoorState) -> float:
    """Seconds until doors are fully open for boarding at the current stop.

    Closing doors finish their cycle and reopen; closed doors open fresh.
    """
    phase, elapsed = door.phase, door.elapsed
    if phase is DoorPhase.OPENING:
        if elapsed > timing.open_time:
            raise ValueError("elapsed exceeds opening duration")
        return timing.open_time - elapsed
    if phase is DoorPhase.OPEN:
        if elapsed > timing.dwell_time:
            raise ValueError("elapsed exceeds dwell duration")
        return 0.0
    if phase is DoorPhase.CLOSING:
        if elapsed > timing.close_time:
            raise ValueError("elapsed exceeds closing duration")
        return (timing.close_time - elapsed) + timing.open_time
    return timing.open_time
