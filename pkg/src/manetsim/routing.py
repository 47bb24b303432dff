"""Two simplified multihop routing families with hop count as the path metric.

* ReactiveDV: on-demand route request / route reply flooding with route error
  propagation on breaks (distance-vector style).
* ProactiveLS: periodic hellos and topology broadcasts relayed by multipoint
  relays, with deterministic shortest-path sweeps per node (link-state style).

These are protocol skeletons, not RFC implementations: per-origin sequence
counters only, no hysteresis, and position-driven break detection supplied by
the link verdict layer.  Both consult the verdict layer for successor
eligibility so the link-duration policies mediate all failure handling.

The `world` collaborator (the per-run simulation) provides messaging, verdict
queries, counters, and timer scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .engine import TIMER_EXPIRY, ticks_from_s


# Control messages.  Sizes are crude byte accounting for overhead comparison.

@dataclass(frozen=True)
class Rreq:
    origin: int
    seq: int
    target: int
    trace: tuple[int, ...]  # nodes traversed so far, origin first
    override: bool = False  # True on the final attempt that ignores stability filtering

    kind = "RREQ"

    @property
    def size_bytes(self) -> int:
        return 24 + 4 * len(self.trace)


@dataclass(frozen=True)
class Rrep:
    dest: int                 # destination the route leads to
    path: tuple[int, ...]     # origin ... answering node
    tail_hops: int            # hops beyond the answering node (0 when it is dest)
    idx: int                  # index in path of the node this copy is addressed to

    kind = "RREP"

    @property
    def size_bytes(self) -> int:
        return 20 + 4 * len(self.path)


@dataclass(frozen=True)
class Rerr:
    dests: tuple[int, ...]

    kind = "RERR"

    @property
    def size_bytes(self) -> int:
        return 12 + 4 * len(self.dests)


@dataclass(frozen=True)
class Hello:
    sender: int
    neighbors: tuple[int, ...]

    kind = "HELLO"

    @property
    def size_bytes(self) -> int:
        return 12 + 4 * len(self.neighbors)


@dataclass(frozen=True)
class Tc:
    origin: int
    seq: int
    neighbors: tuple[int, ...]

    kind = "TC"

    @property
    def size_bytes(self) -> int:
        return 16 + 4 * len(self.neighbors)


@dataclass
class DataPacket:
    pkt_id: int
    src: int
    dst: int
    size_bytes: int
    created_at: int
    hops: int = 0

    kind = "DATA"


@dataclass
class RouteEntry:
    dest: int
    next_hop: int
    hop_count: int
    installed_at: int
    active: bool


def shortest_routes(adj: dict[int, set[int]], src: int,
                    eligible=None) -> dict[int, tuple[int, int]]:
    """Deterministic hop-count shortest paths from src: dest -> (next_hop, hops).

    Among equal-length paths the one with the smallest first-hop id wins.
    Nodes failing `eligible` are never expanded through (they can terminate a
    path as destination, but not relay one); src always expands.
    """
    dist: dict[int, int] = {src: 0}
    nh: dict[int, int] = {}
    frontier = [src]
    d = 0
    while frontier:
        candidates: dict[int, int] = {}
        for u in frontier:
            if u != src and eligible is not None and not eligible(u):
                continue
            for v in adj.get(u, ()):
                if v in dist:
                    continue
                c = v if u == src else nh[u]
                prev = candidates.get(v)
                if prev is None or c < prev:
                    candidates[v] = c
        d += 1
        for v, c in candidates.items():
            dist[v] = d
            nh[v] = c
        frontier = sorted(candidates)
    return {v: (nh[v], dist[v]) for v in dist if v != src}


def mpr_select(coverage: dict[int, set[int]], two_hop: set[int]) -> set[int]:
    """Greedy relay cover: repeatedly pick the neighbor covering the most
    uncovered two-hop nodes (smallest id on ties) until all are covered."""
    uncovered = set(two_hop)
    relays: set[int] = set()
    while uncovered:
        best = None
        best_gain = 0
        for nbr in sorted(coverage):
            gain = len(coverage[nbr] & uncovered)
            if gain > best_gain:
                best, best_gain = nbr, gain
        if best is None:
            raise ValueError(f"two-hop nodes {sorted(uncovered)} not coverable by any neighbor")
        relays.add(best)
        uncovered -= coverage[best]
    return relays


@dataclass
class _Pending:
    """An in-progress on-demand discovery at a source node."""

    queue: list[DataPacket] = field(default_factory=list)
    attempts: int = 0
    timer: object = None
    t_request: int = 0
    overriding: bool = False


class ReactiveDV:
    """On-demand distance-vector family (route request / reply / error)."""

    def __init__(self, world):
        self.world = world
        ids = world.node_ids
        self.routes: dict[int, dict[int, RouteEntry]] = {n: {} for n in ids}
        self.seen_rreq: dict[int, set[tuple[int, int]]] = {n: set() for n in ids}
        self.origin_seq: dict[int, int] = {n: 0 for n in ids}
        self.pending: dict[tuple[int, int], _Pending] = {}

    def start(self) -> None:
        pass  # purely reactive

    # -- data plane hooks ---------------------------------------------------

    def next_hop(self, node: int, dest: int) -> int | None:
        entry = self.routes[node].get(dest)
        if entry is None:
            return None
        entry.active = True
        return entry.next_hop

    def handle_no_route(self, node: int, pkt: DataPacket) -> bool:
        """Queue at the source pending discovery; intermediates drop."""
        if node != pkt.src:
            return False
        self.discover(node, pkt.dst)
        self.pending[(node, pkt.dst)].queue.append(pkt)
        return True

    # -- discovery ----------------------------------------------------------

    def discover(self, src: int, dst: int) -> None:
        key = (src, dst)
        if key in self.pending:
            return
        p = _Pending(t_request=self.world.sim.now)
        self.pending[key] = p
        self._send_rreq(src, dst, p)

    def _send_rreq(self, src: int, dst: int, p: _Pending) -> None:
        p.attempts += 1
        self.origin_seq[src] += 1
        seq = self.origin_seq[src]
        self.seen_rreq[src].add((src, seq))
        msg = Rreq(origin=src, seq=seq, target=dst, trace=(src,), override=p.overriding)
        self.world.broadcast(src, msg)
        params = self.world.params
        p.timer = self.world.sim.schedule_in(
            ticks_from_s(params.rreq_timeout_s), TIMER_EXPIRY,
            lambda: self._timeout(src, dst), node=src, detail=f"rreq-timeout dst={dst}")

    def _timeout(self, src: int, dst: int) -> None:
        key = (src, dst)
        p = self.pending.get(key)
        if p is None:
            return
        params = self.world.params
        if p.attempts <= params.rreq_retries:
            self._send_rreq(src, dst, p)
        elif self.world.ssld_filtering and not p.overriding:
            # Last resort: one unfiltered flood so stability filtering alone
            # can never make a physically reachable destination unreachable.
            p.overriding = True
            self._send_rreq(src, dst, p)
        else:
            for pkt in p.queue:
                self.world.count_drop("unreachable")
            del self.pending[key]

    # -- message handling ---------------------------------------------------

    def on_message(self, node: int, sender: int, msg) -> None:
        if isinstance(msg, Rreq):
            self._on_rreq(node, sender, msg)
        elif isinstance(msg, Rrep):
            self._on_rrep(node, sender, msg)
        elif isinstance(msg, Rerr):
            self._on_rerr(node, sender, msg)

    def _on_rreq(self, node: int, sender: int, msg: Rreq) -> None:
        if (msg.origin, msg.seq) in self.seen_rreq[node]:
            return
        self.seen_rreq[node].add((msg.origin, msg.seq))
        reverse_hops = len(msg.trace)
        existing = self.routes[node].get(msg.origin)
        if existing is None or reverse_hops < existing.hop_count:
            self.routes[node][msg.origin] = RouteEntry(
                msg.origin, sender, reverse_hops, self.world.sim.now, active=False)
        if node == msg.target:
            rrep = Rrep(dest=msg.target, path=msg.trace + (node,), tail_hops=0,
                        idx=len(msg.trace) - 1)
            self.world.unicast(node, msg.trace[-1], rrep)
            return
        entry = self.routes[node].get(msg.target)
        if entry is not None and entry.active:
            rrep = Rrep(dest=msg.target, path=msg.trace + (node,),
                        tail_hops=entry.hop_count, idx=len(msg.trace) - 1)
            self.world.unicast(node, msg.trace[-1], rrep)
            return
        if msg.override or self.world.successor_ok(node):
            self.world.broadcast(node, replace(msg, trace=msg.trace + (node,)))

    def _on_rrep(self, node: int, sender: int, msg: Rrep) -> None:
        if msg.path[msg.idx] != node:
            return  # stale copy after topology change
        hops = (len(msg.path) - 1 - msg.idx) + msg.tail_hops
        existing = self.routes[node].get(msg.dest)
        if existing is None or hops < existing.hop_count or not existing.active:
            self.routes[node][msg.dest] = RouteEntry(
                msg.dest, sender, hops, self.world.sim.now, active=True)
        if msg.idx == 0:
            self._discovery_done(node, msg.dest)
        else:
            self.world.unicast(node, msg.path[msg.idx - 1], replace(msg, idx=msg.idx - 1))

    def _discovery_done(self, src: int, dst: int) -> None:
        p = self.pending.pop((src, dst), None)
        if p is None:
            return
        self.world.sim.cancel(p.timer)
        self.world.record_discovery(self.world.sim.now - p.t_request)
        for pkt in p.queue:
            self.world.send_data(src, pkt)

    def _on_rerr(self, node: int, sender: int, msg: Rerr) -> None:
        lost_active = self._invalidate(node, sender, msg.dests, count=False)
        if lost_active:
            self.world.broadcast(node, Rerr(dests=tuple(sorted(lost_active))))
            self._redemand(node, lost_active)

    # -- verdict events -----------------------------------------------------

    def on_verdict_down(self, link, t: int) -> None:
        for node, other in ((link[0], link[1]), (link[1], link[0])):
            dests = [d for d, e in self.routes[node].items() if e.next_hop == other]
            lost_active = self._invalidate(node, other, dests, count=True)
            if lost_active:
                self.world.broadcast(node, Rerr(dests=tuple(sorted(lost_active))))
                self._redemand(node, lost_active)

    def on_verdict_up(self, link, t: int) -> None:
        pass  # reactive: a new link is used only when demanded

    def _invalidate(self, node: int, via: int, dests, count: bool) -> list[int]:
        lost_active = []
        for d in dests:
            entry = self.routes[node].get(d)
            if entry is None or entry.next_hop != via:
                continue
            if entry.active:
                lost_active.append(d)
                if count:
                    self.world.counters.recomputations += 1
            del self.routes[node][d]
        return lost_active

    def _redemand(self, node: int, dests) -> None:
        for d in dests:
            if d in self.world.flow_dests(node):
                self.discover(node, d)


class ProactiveLS:
    """Proactive link-state family: hellos, relay-flooded topology broadcasts,
    per-node deterministic shortest-path sweeps recomputed on view changes."""

    def __init__(self, world):
        self.world = world
        ids = world.node_ids
        self.last_heard: dict[int, dict[int, int]] = {n: {} for n in ids}
        self.nbr_sets: dict[int, dict[int, frozenset]] = {n: {} for n in ids}
        self.topo: dict[int, dict[int, tuple[int, frozenset]]] = {n: {} for n in ids}
        self.routes: dict[int, dict[int, tuple[int, int]]] = {n: {} for n in ids}
        self.dirty: set[int] = set(ids)
        self.tc_seq: dict[int, int] = {n: 0 for n in ids}
        self.forwarded_tc: dict[int, set[tuple[int, int]]] = {n: set() for n in ids}
        self._mpr_cache: dict[int, set[int] | None] = {n: None for n in ids}
        self._last_immediate_tc: dict[int, int] = {n: -(10 ** 9) for n in ids}

    def start(self) -> None:
        params = self.world.params
        self._hello_tick(ticks_from_s(params.hello_interval_s))
        first_tc = ticks_from_s(params.tc_start_s)
        self.world.sim.schedule(first_tc, TIMER_EXPIRY,
                                lambda: self._tc_tick(ticks_from_s(params.tc_interval_s)),
                                detail="tc-round")

    # -- periodic control ---------------------------------------------------

    def _hello_tick(self, interval: int) -> None:
        now = self.world.sim.now
        expiry = self.world.params.neighbor_expiry_hellos * interval
        for node in self.world.node_ids:
            stale = [v for v, tk in self.last_heard[node].items() if tk < now - expiry]
            for v in stale:
                del self.last_heard[node][v]
                self.nbr_sets[node].pop(v, None)
                self._view_changed(node)
            self.world.broadcast(node, Hello(node, tuple(sorted(self.one_hop(node)))))
        nxt = now + interval
        if nxt < self.world.end_ticks:
            self.world.sim.schedule(nxt, TIMER_EXPIRY, lambda: self._hello_tick(interval),
                                    detail="hello-round")

    def _tc_tick(self, interval: int) -> None:
        for node in self.world.node_ids:
            self._emit_tc(node)
        nxt = self.world.sim.now + interval
        if nxt < self.world.end_ticks:
            self.world.sim.schedule(nxt, TIMER_EXPIRY, lambda: self._tc_tick(interval),
                                    detail="tc-round")

    def _emit_tc(self, node: int) -> None:
        self.tc_seq[node] += 1
        msg = Tc(node, self.tc_seq[node], tuple(sorted(self.one_hop(node))))
        self.forwarded_tc[node].add((node, msg.seq))
        self.world.broadcast(node, msg)

    # -- neighborhood views -------------------------------------------------

    def one_hop(self, node: int) -> set[int]:
        """Heard recently and currently verdict-up."""
        up = self.world.up_neighbor_set(node)
        return {v for v in self.last_heard[node] if v in up}

    def mpr_set(self, node: int) -> set[int]:
        cached = self._mpr_cache[node]
        if cached is not None:
            return cached
        one = self.one_hop(node)
        coverage = {}
        for v in one:
            adv = self.nbr_sets[node].get(v, frozenset())
            coverage[v] = {w for w in adv if w != node and w not in one}
        two_hop = set().union(*coverage.values()) if coverage else set()
        relays = mpr_select(coverage, two_hop)
        self._mpr_cache[node] = relays
        return relays

    def _view_changed(self, node: int) -> None:
        self.dirty.add(node)
        self._mpr_cache[node] = None

    # -- message handling ---------------------------------------------------

    def on_message(self, node: int, sender: int, msg) -> None:
        if isinstance(msg, Hello):
            self.last_heard[node][msg.sender] = self.world.sim.now
            new = frozenset(msg.neighbors)
            if self.nbr_sets[node].get(msg.sender) != new:
                self._view_changed(node)
            self.nbr_sets[node][msg.sender] = new
        elif isinstance(msg, Tc):
            self._on_tc(node, sender, msg)

    def _on_tc(self, node: int, sender: int, msg: Tc) -> None:
        known = self.topo[node].get(msg.origin)
        if known is None or msg.seq > known[0]:
            new = frozenset(msg.neighbors)
            if known is None or known[1] != new:
                self._view_changed(node)
            self.topo[node][msg.origin] = (msg.seq, new)
        key = (msg.origin, msg.seq)
        if key not in self.forwarded_tc[node] and node in self.mpr_set(sender):
            self.forwarded_tc[node].add(key)
            self.world.broadcast(node, msg)

    # -- verdict events -----------------------------------------------------

    def on_verdict_down(self, link, t: int) -> None:
        self._on_local_change(link)

    def on_verdict_up(self, link, t: int) -> None:
        self._on_local_change(link)

    def _on_local_change(self, link) -> None:
        params = self.world.params
        min_gap = ticks_from_s(params.tc_min_interval_s)
        for node in link:
            self._view_changed(node)
            if self.world.sim.now - self._last_immediate_tc[node] >= min_gap:
                self._last_immediate_tc[node] = self.world.sim.now
                self._emit_tc(node)

    # -- data plane ---------------------------------------------------------

    def next_hop(self, node: int, dest: int) -> int | None:
        if node in self.dirty:
            self._recompute(node)
        route = self.routes[node].get(dest)
        return route[0] if route else None

    def handle_no_route(self, node: int, pkt: DataPacket) -> bool:
        return False  # proactive: no route means drop

    def route_table(self, node: int) -> dict[int, tuple[int, int]]:
        if node in self.dirty:
            self._recompute(node)
        return dict(self.routes[node])

    def _adjacency(self, node: int) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {}

        def add(a: int, b: int) -> None:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)

        for v in self.world.up_neighbor_set(node):
            add(node, v)
        for v in self.one_hop(node):  # departed neighbors' adverts are stale
            for w in self.nbr_sets[node].get(v, ()):
                add(v, w)
        for origin, (_seq, nbrs) in self.topo[node].items():
            for w in nbrs:
                add(origin, w)
        return adj

    def _recompute(self, node: int) -> None:
        self.dirty.discard(node)
        self.world.counters.recomputations += 1
        adj = self._adjacency(node)
        if self.world.ssld_filtering:
            filtered = shortest_routes(adj, node, eligible=self.world.successor_ok)
            unfiltered = shortest_routes(adj, node)
            for d, r in unfiltered.items():
                filtered.setdefault(d, r)  # reachability override
            self.routes[node] = filtered
        else:
            self.routes[node] = shortest_routes(adj, node)
