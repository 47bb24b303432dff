import math
import random

import pytest

from manetsim.engine import RngStream, ticks_from_s
from manetsim.mobility import (Confined, FreeWaypoint, PingPong, Static, Trajectory,
                               is_stationary, pose_at)


def _rng(seed=1, sid="mobility/0"):
    return RngStream(seed, sid)


def test_static_identity():
    spec = Static(home=(3.0, 4.0))
    for t_s in (0, 0.5, 7, 123.456):
        p = pose_at(spec, _rng(), ticks_from_s(t_s))
        assert p.position == (3.0, 4.0)
        assert (p.vx, p.vy) == (0.0, 0.0)
        assert p.is_paused and is_stationary(p)


def test_pingpong_piecewise_kinematics():
    spec = PingPong(pos_a=(0.0, 0.0), pos_b=(10.0, 0.0), dwell_a_s=1.0, dwell_b_s=1.0,
                    transit_speed=10.0)
    traj = Trajectory(spec, _rng())
    assert traj.pose_at(0).position == (0.0, 0.0)
    assert traj.pose_at(ticks_from_s(1.5)).position == (5.0, 0.0)
    assert traj.pose_at(ticks_from_s(2.0)).position == (10.0, 0.0)
    assert traj.pose_at(ticks_from_s(4.0)).position == (0.0, 0.0)
    # dwell means zero velocity
    dwelling = traj.pose_at(ticks_from_s(0.5))
    assert is_stationary(dwelling) and dwelling.is_paused
    moving = traj.pose_at(ticks_from_s(1.5))
    assert not is_stationary(moving)
    assert moving.vx == pytest.approx(10.0)


def test_pingpong_periodicity():
    spec = PingPong(pos_a=(2.0, 1.0), pos_b=(8.0, 9.0), dwell_a_s=0.7, dwell_b_s=0.3,
                    transit_speed=5.0)
    period = ticks_from_s(0.7) + ticks_from_s(0.3) + 2 * ticks_from_s(math.dist((2, 1), (8, 9)) / 5.0)
    traj = Trajectory(spec, _rng())
    rnd = random.Random(3)
    for _ in range(50):
        t = rnd.randint(0, 5 * period)
        a = traj.pose_at(t)
        b = traj.pose_at(t + period)
        assert a.position == pytest.approx(b.position)
        assert (a.vx, a.vy) == pytest.approx((b.vx, b.vy))


def test_confined_containment_sampled():
    spec = Confined(home=(0.0, 0.0), radius_m=5.0, move_period_s=2.0, leg_speed=3.0)
    traj = Trajectory(spec, _rng(seed=11))
    rnd = random.Random(5)
    for _ in range(1000):
        t = rnd.randint(0, ticks_from_s(120.0))
        p = traj.pose_at(t)
        assert math.hypot(p.x, p.y) <= 5.0 + 1e-9


def test_confined_speed_bound():
    spec = Confined(home=(10.0, -4.0), radius_m=8.0, move_period_s=1.5, leg_speed=4.0)
    traj = Trajectory(spec, _rng(seed=2))
    rnd = random.Random(9)
    for _ in range(500):
        p = traj.pose_at(rnd.randint(0, ticks_from_s(60.0)))
        # effective leg speed may deviate by the half-tick duration rounding
        assert p.speed <= 4.0 * 1.01


def test_waypoint_speed_bounds_and_area():
    spec = FreeWaypoint(area=(0.0, 0.0, 100.0, 80.0), speed_min=1.0, speed_max=3.0,
                        pause_min_s=0.0, pause_max_s=2.0)
    traj = Trajectory(spec, _rng(seed=4))
    rnd = random.Random(17)
    for _ in range(800):
        p = traj.pose_at(rnd.randint(0, ticks_from_s(300.0)))
        assert 0.0 <= p.x <= 100.0 and 0.0 <= p.y <= 80.0
        if p.is_paused:
            assert is_stationary(p)
        else:
            assert 1.0 * 0.99 <= p.speed <= 3.0 * 1.01


def test_trajectory_deterministic_in_seed():
    spec = FreeWaypoint(area=(0.0, 0.0, 50.0, 50.0), speed_min=0.5, speed_max=2.0,
                        pause_min_s=0.5, pause_max_s=1.0)
    t1 = Trajectory(spec, _rng(seed=6))
    t2 = Trajectory(spec, _rng(seed=6))
    t3 = Trajectory(spec, _rng(seed=7))
    samples = [ticks_from_s(s / 10) for s in range(0, 600, 7)]
    p1 = [t1.pose_at(t).position for t in samples]
    p2 = [t2.pose_at(t).position for t in samples]
    p3 = [t3.pose_at(t).position for t in samples]
    assert p1 == p2
    assert p1 != p3


def test_trajectory_query_order_does_not_matter():
    spec = Confined(home=(0.0, 0.0), radius_m=5.0, move_period_s=1.0, leg_speed=2.0)
    fwd = Trajectory(spec, _rng(seed=8))
    bwd = Trajectory(spec, _rng(seed=8))
    ts = [ticks_from_s(x) for x in (0.3, 5.7, 2.1, 9.9, 0.0, 7.4)]
    a = [fwd.pose_at(t).position for t in ts]
    b = [bwd.pose_at(t).position for t in sorted(ts)]
    paired = dict(zip(sorted(ts), b))
    assert a == [paired[t] for t in ts]


def test_pause_intervals_pingpong_arithmetic():
    spec = PingPong(pos_a=(0.0, 0.0), pos_b=(10.0, 0.0), dwell_a_s=1.0, dwell_b_s=1.0,
                    transit_speed=10.0)
    traj = Trajectory(spec, _rng())
    intervals = traj.pause_intervals(ticks_from_s(40.0))
    total = sum(e - s for s, e in intervals)
    assert total == ticks_from_s(20.0)
    assert all(e > s for s, e in intervals)
    # disjoint and ordered
    for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
        assert e1 <= s2


def test_pause_intervals_static_single():
    traj = Trajectory(Static(home=(1.0, 1.0)), _rng())
    assert traj.pause_intervals(ticks_from_s(100.0)) == [(0, ticks_from_s(100.0))]


def test_stationary_throughout():
    spec = PingPong(pos_a=(0.0, 0.0), pos_b=(10.0, 0.0), dwell_a_s=1.0, dwell_b_s=1.0,
                    transit_speed=10.0)
    traj = Trajectory(spec, _rng())
    assert traj.stationary_throughout(0, ticks_from_s(0.9))
    assert not traj.stationary_throughout(0, ticks_from_s(1.5))
    assert traj.stationary_throughout(ticks_from_s(2.2), ticks_from_s(2.8))


def test_spec_validation():
    with pytest.raises(ValueError):
        PingPong(pos_a=(0, 0), pos_b=(0, 0), dwell_a_s=1, dwell_b_s=1, transit_speed=1)
    with pytest.raises(ValueError):
        Confined(home=(0, 0), radius_m=0, move_period_s=1, leg_speed=1)
    with pytest.raises(ValueError):
        FreeWaypoint(area=(0, 0, 10, 10), speed_min=3, speed_max=2,
                     pause_min_s=0, pause_max_s=1)
    with pytest.raises(ValueError):
        FreeWaypoint(area=(10, 0, 0, 10), speed_min=1, speed_max=2,
                     pause_min_s=0, pause_max_s=1)
