"""Shared brute-force oracles for the test suite.

These deliberately recompute quantities from exported artifacts (link interval
CSV, raw trajectories) by independent means, so they stay decoupled from the
online code paths they check.
"""

from __future__ import annotations

import math
import random

from manetsim.engine import TICKS_PER_SECOND
from manetsim.simulation import Simulation


def parse_links_csv(text: str) -> list[tuple[tuple[int, int], int, int, bool]]:
    """Rows of (link, start_ticks, end_ticks, censored)."""
    out = []
    for line in text.strip().splitlines()[1:]:
        link_s, start_ms, end_ms, _dur, censored = line.split(",")
        a, b = link_s.split("-")
        out.append(((int(a), int(b)),
                    round(float(start_ms) * TICKS_PER_SECOND / 1000),
                    round(float(end_ms) * TICKS_PER_SECOND / 1000),
                    censored == "1"))
    return out


def degree_from_intervals(rows, node: int, t: int) -> int:
    """Neighbor count at tick t reconstructed from link up-intervals."""
    deg = 0
    for (a, b), start, end, censored in rows:
        if node not in (a, b):
            continue
        if start <= t and (censored or t < end):
            deg += 1
    return deg


def breaks_from_intervals(rows, node: int, t0: int, t1: int) -> int:
    """Incident-link down events in (t0, t1] from the interval export."""
    n = 0
    for (a, b), _start, end, censored in rows:
        if censored or node not in (a, b):
            continue
        if t0 < end <= t1:
            n += 1
    return n


def per_tick_link_intervals(sim: Simulation, a: int, b: int) -> list[tuple[int, int | None]]:
    """Dense per-tick sampling of the range predicate for one pair."""
    intervals = []
    up_since = None
    r2 = sim._range2
    for t in range(0, sim.end_ticks + 1):
        up = sim._dist2(a, b, t) <= r2
        if up and up_since is None:
            up_since = t
        elif not up and up_since is not None:
            intervals.append((up_since, t))
            up_since = None
    if up_since is not None:
        intervals.append((up_since, None))
    return intervals


def bfs_hops(adj: dict[int, set[int]], src: int) -> dict[int, int]:
    """Plain breadth-first hop counts, independent of the routing module."""
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj.get(u, ()):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def random_connected_graph(rnd: random.Random, n: int) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    order = list(range(n))
    rnd.shuffle(order)
    for i in range(1, n):
        a, b = order[i], order[rnd.randrange(i)]
        adj[a].add(b)
        adj[b].add(a)
    extra = rnd.randrange(n)
    for _ in range(extra):
        a, b = rnd.sample(range(n), 2)
        adj[a].add(b)
        adj[b].add(a)
    return adj


def connected_unit_disk_layout(rnd: random.Random, n: int, area: float,
                               range_m: float) -> dict[int, tuple[float, float]]:
    """Random static placement re-drawn until the disk graph is connected."""
    while True:
        pos = {i: (rnd.uniform(0, area), rnd.uniform(0, area)) for i in range(n)}
        adj = {i: set() for i in range(n)}
        for i in range(n):
            for j in range(i + 1, n):
                if math.dist(pos[i], pos[j]) <= range_m:
                    adj[i].add(j)
                    adj[j].add(i)
        if len(bfs_hops(adj, 0)) == n:
            return pos
