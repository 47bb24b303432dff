"""Node movement patterns: static, confined, ping-pong, and random-waypoint roaming.

Every pattern expands into a lazy sequence of piecewise-linear legs with
integer-tick boundaries.  A leg is either a pause (zero velocity) or a
constant-velocity transit; positions are interpolated inside a leg, so a
trajectory is a pure function of (spec, seed, t).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, Union

from .engine import RngStream, TICKS_PER_SECOND, ticks_from_s


@dataclass(frozen=True)
class Static:
    home: tuple[float, float]


@dataclass(frozen=True)
class Confined:
    """Roams inside a disc around home: a fresh uniform-random target is picked
    every move_period and reached at leg_speed, pausing until the next period."""

    home: tuple[float, float]
    radius_m: float
    move_period_s: float
    leg_speed: float

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("confined radius must be > 0")
        if self.move_period_s <= 0:
            raise ValueError("move period must be > 0")
        if self.leg_speed <= 0:
            raise ValueError("leg speed must be > 0")


@dataclass(frozen=True)
class PingPong:
    """Oscillates between two points: dwell at A, transit, dwell at B, transit back."""

    pos_a: tuple[float, float]
    pos_b: tuple[float, float]
    dwell_a_s: float
    dwell_b_s: float
    transit_speed: float

    def __post_init__(self):
        if self.pos_a == self.pos_b:
            raise ValueError("ping-pong endpoints must differ")
        if self.dwell_a_s < 0 or self.dwell_b_s < 0:
            raise ValueError("dwell times must be >= 0")
        if self.transit_speed <= 0:
            raise ValueError("transit speed must be > 0")


@dataclass(frozen=True)
class FreeWaypoint:
    """Classic waypoint roaming inside a rectangle with uniform pauses."""

    area: tuple[float, float, float, float]  # x0, y0, x1, y1
    speed_min: float
    speed_max: float
    pause_min_s: float
    pause_max_s: float

    def __post_init__(self):
        x0, y0, x1, y1 = self.area
        if x1 <= x0 or y1 <= y0:
            raise ValueError("area rectangle must have positive extent")
        if self.speed_min <= 0 or self.speed_max < self.speed_min:
            raise ValueError("need 0 < speed_min <= speed_max")
        if self.pause_min_s < 0 or self.pause_max_s < self.pause_min_s:
            raise ValueError("need 0 <= pause_min <= pause_max")


MobilitySpec = Union[Static, Confined, PingPong, FreeWaypoint]


@dataclass(frozen=True)
class NodePose:
    x: float
    y: float
    vx: float
    vy: float
    is_paused: bool

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def is_stationary(pose: NodePose) -> bool:
    return pose.vx == 0.0 and pose.vy == 0.0


class Leg:
    """One trajectory segment over [t0, t1) ticks; t1 is None for an open end."""

    __slots__ = ("t0", "t1", "x0", "y0", "x1", "y1", "vx_t", "vy_t", "paused")

    def __init__(self, t0: int, t1: int | None, p0, p1, paused: bool):
        self.t0 = t0
        self.t1 = t1
        self.x0, self.y0 = p0
        self.x1, self.y1 = p1
        self.paused = paused
        if paused or t1 is None or t1 == t0:
            self.vx_t = 0.0
            self.vy_t = 0.0
        else:
            dur = t1 - t0
            self.vx_t = (self.x1 - self.x0) / dur  # meters per tick
            self.vy_t = (self.y1 - self.y0) / dur

    def position_at(self, t: int) -> tuple[float, float]:
        return (self.x0 + self.vx_t * (t - self.t0),
                self.y0 + self.vy_t * (t - self.t0))


class Trajectory:
    """Lazily-expanded trajectory for one node.

    Deterministic in (spec, rng seed); legs are generated in order, so any
    pose query replays identically across runs.
    """

    def __init__(self, spec: MobilitySpec, rng: RngStream):
        self.spec = spec
        self._gen = _leg_source(spec, rng)
        self._legs: list[Leg] = []
        self._starts: list[int] = []
        self._extend_to(0)

    def _extend_to(self, t: int) -> None:
        while not self._legs or (self._legs[-1].t1 is not None and self._legs[-1].t1 <= t):
            leg = next(self._gen)
            self._legs.append(leg)
            self._starts.append(leg.t0)

    def leg_at(self, t: int) -> Leg:
        if t < 0:
            raise ValueError("time must be >= 0")
        self._extend_to(t)
        idx = bisect_right(self._starts, t) - 1
        return self._legs[idx]

    def pose_at(self, t: int) -> NodePose:
        leg = self.leg_at(t)
        x, y = leg.position_at(t)
        return NodePose(x, y, leg.vx_t * TICKS_PER_SECOND, leg.vy_t * TICKS_PER_SECOND,
                        leg.paused)

    def next_change(self, t: int) -> int | None:
        """First leg boundary strictly after t, or None if the leg never ends."""
        leg = self.leg_at(t)
        return leg.t1

    def stationary_throughout(self, t0: int, t1: int) -> bool:
        """True iff velocity is zero over the whole closed interval [t0, t1]."""
        t = t0
        while True:
            leg = self.leg_at(t)
            if not leg.paused:
                return False
            if leg.t1 is None or leg.t1 > t1:
                return True
            t = leg.t1

    def pause_intervals(self, t_end: int) -> list[tuple[int, int]]:
        """Maximal zero-velocity intervals clipped to [0, t_end], merged when adjacent."""
        out: list[tuple[int, int]] = []
        t = 0
        while t < t_end:
            leg = self.leg_at(t)
            end = t_end if leg.t1 is None else min(leg.t1, t_end)
            if leg.paused:
                if out and out[-1][1] == t:
                    out[-1] = (out[-1][0], end)
                else:
                    out.append((t, end))
            t = end
        return out


def pose_at(spec: MobilitySpec, rng: RngStream, t: int) -> NodePose:
    """Convenience one-shot pose query; builds a throwaway trajectory."""
    return Trajectory(spec, rng).pose_at(t)


def _leg_source(spec: MobilitySpec, rng: RngStream) -> Iterator[Leg]:
    if isinstance(spec, Static):
        return _static_legs(spec)
    if isinstance(spec, Confined):
        return _confined_legs(spec, rng)
    if isinstance(spec, PingPong):
        return _pingpong_legs(spec)
    if isinstance(spec, FreeWaypoint):
        return _waypoint_legs(spec, rng)
    raise TypeError(f"unknown mobility spec: {spec!r}")


def _static_legs(spec: Static) -> Iterator[Leg]:
    yield Leg(0, None, spec.home, spec.home, paused=True)


def _pingpong_legs(spec: PingPong) -> Iterator[Leg]:
    dist = math.dist(spec.pos_a, spec.pos_b)
    transit = max(1, ticks_from_s(dist / spec.transit_speed))
    dwell_a = ticks_from_s(spec.dwell_a_s)
    dwell_b = ticks_from_s(spec.dwell_b_s)
    t = 0
    while True:
        if dwell_a > 0:
            yield Leg(t, t + dwell_a, spec.pos_a, spec.pos_a, paused=True)
            t += dwell_a
        yield Leg(t, t + transit, spec.pos_a, spec.pos_b, paused=False)
        t += transit
        if dwell_b > 0:
            yield Leg(t, t + dwell_b, spec.pos_b, spec.pos_b, paused=True)
            t += dwell_b
        yield Leg(t, t + transit, spec.pos_b, spec.pos_a, paused=False)
        t += transit


def _confined_legs(spec: Confined, rng: RngStream) -> Iterator[Leg]:
    period = max(1, ticks_from_s(spec.move_period_s))
    hx, hy = spec.home
    pos = spec.home
    t = 0
    while True:
        # Uniform point in the disc; both current position and target lie inside,
        # so the straight leg between them stays inside (convexity).
        r = spec.radius_m * math.sqrt(rng.random())
        theta = 2.0 * math.pi * rng.random()
        target = (hx + r * math.cos(theta), hy + r * math.sin(theta))
        travel = ticks_from_s(math.dist(pos, target) / spec.leg_speed)
        if travel >= 1:
            if travel <= period:
                yield Leg(t, t + travel, pos, target, paused=False)
                if travel < period:
                    yield Leg(t + travel, t + period, target, target, paused=True)
                pos = target
            else:
                # Target unreachable within the period; clip mid-transit and
                # pick the next target from wherever the node ended up.
                frac = period / travel
                reach = (pos[0] + (target[0] - pos[0]) * frac,
                         pos[1] + (target[1] - pos[1]) * frac)
                yield Leg(t, t + period, pos, reach, paused=False)
                pos = reach
        else:
            yield Leg(t, t + period, pos, pos, paused=True)
        t += period


def _waypoint_legs(spec: FreeWaypoint, rng: RngStream) -> Iterator[Leg]:
    x0, y0, x1, y1 = spec.area
    pos = (rng.uniform(x0, x1), rng.uniform(y0, y1))
    t = 0
    while True:
        pause = ticks_from_s(rng.uniform(spec.pause_min_s, spec.pause_max_s))
        if pause >= 1:
            yield Leg(t, t + pause, pos, pos, paused=True)
            t += pause
        target = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        speed = rng.uniform(spec.speed_min, spec.speed_max)
        travel = ticks_from_s(math.dist(pos, target) / speed)
        if travel >= 1:
            yield Leg(t, t + travel, pos, target, paused=False)
            t += travel
            pos = target
