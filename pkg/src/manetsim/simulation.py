"""One simulation run: trajectories, event-driven link detection, metrics,
verdicts, routing, and traffic, assembled from a scenario spec.

Link transitions are located exactly on the tick lattice: node trajectories
are piecewise linear, so squared pair distance is quadratic on each leg
overlap and the first tick where the range predicate flips can be found from
the roots and verified by direct evaluation.  No periodic position polling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import (MOBILITY_UPDATE, MSG_DELIVER, METRIC_SAMPLE, TRAFFIC_GEN,
                     RngStream, Simulator, TICKS_PER_SECOND, fmt_ms, ticks_from_ms,
                     ticks_from_s)
from .heuristics import (HeuristicKind, StabilityClass, VerdictTracker, classify,
                         successor_eligible)
from .metrics import MetricsTracker, PauseStats, link_key
from .mobility import Trajectory
from .routing import DataPacket, ProactiveLS, ReactiveDV
from .scenarios import Family, ScenarioSpec


@dataclass
class Counters:
    recomputations: int = 0
    control_msgs: int = 0
    control_bytes: int = 0
    pkts_sent: int = 0
    pkts_delivered: int = 0
    pkts_dropped: int = 0
    drop_reasons: dict[str, int] = field(default_factory=dict)
    delay_sum_ticks: int = 0
    delays_ticks: list[int] = field(default_factory=list)
    discovery_latencies: list[int] = field(default_factory=list)


@dataclass
class RunResult:
    name: str
    seed: int
    duration_s: float
    n_nodes: int
    family: str
    heuristic: str
    pattern: str = ""
    density: str = ""
    frequency: str = ""
    link_length: str = ""
    recomputations: int = 0
    control_msgs: int = 0
    control_bytes: int = 0
    pkts_sent: int = 0
    pkts_delivered: int = 0
    pkts_dropped: int = 0
    mean_delay_ms: float = 0.0
    delivery_ratio: float = 0.0
    discoveries: int = 0
    discovery_latency_mean_ms: float = 0.0
    phys_link_breaks: int = 0
    verdict_breaks: int = 0
    episodes_suppressed: int = 0
    mean_abs_nds: float = 0.0
    mean_alb_per_s: float = 0.0
    mean_ld_s: float = 0.0
    censored_links: int = 0
    mean_total_pause_s: float = 0.0
    static_ratio_mean: float = 0.0
    per_node: dict[int, dict[str, float]] = field(default_factory=dict)


RUNS_CSV_COLUMNS = [
    "name", "pattern", "density", "frequency", "link_length", "heuristic", "family",
    "seed", "duration_s", "n_nodes", "recomputations", "control_msgs", "control_bytes",
    "pkts_sent", "pkts_delivered", "pkts_dropped", "mean_delay_ms", "delivery_ratio",
    "discoveries", "discovery_latency_mean_ms", "phys_link_breaks", "verdict_breaks",
    "episodes_suppressed", "mean_abs_nds", "mean_alb_per_s", "mean_ld_s",
    "censored_links", "mean_total_pause_s", "static_ratio_mean",
]


def result_row(r: RunResult) -> dict[str, str]:
    def num(v) -> str:
        return f"{v:.6f}" if isinstance(v, float) else str(v)

    return {col: num(getattr(r, col)) for col in RUNS_CSV_COLUMNS}


class _Pair:
    __slots__ = ("up", "handle")

    def __init__(self):
        self.up = False
        self.handle = None


class Simulation:
    """Owns all state for a single run; deterministic in (spec, seed)."""

    def __init__(self, spec: ScenarioSpec, trace: bool = False):
        self.spec = spec
        self.params = spec.params
        self.end_ticks = ticks_from_s(spec.duration_s)
        self.node_ids = sorted(spec.nodes)
        self.trace_lines: list[str] | None = [] if trace else None
        self.msg_log: list[str] | None = [] if trace else None
        self.sim = Simulator(trace=self.trace_lines.append if trace else None)

        self.trajs = {i: Trajectory(spec.nodes[i], RngStream(spec.seed, f"mobility/{i}"))
                      for i in self.node_ids}
        self.jitter_rng = RngStream(spec.seed, "jitter")
        self.traffic_rng = RngStream(spec.seed, "traffic")

        r_eff = spec.radio.effective_range_m
        self._range2 = r_eff * r_eff
        self.pairs: dict[tuple[int, int], _Pair] = {}
        self.phys_nbrs: dict[int, set[int]] = {i: set() for i in self.node_ids}
        self.verdict_nbrs: dict[int, set[int]] = {i: set() for i in self.node_ids}

        self.metrics = MetricsTracker(self.node_ids)
        self.verdicts = VerdictTracker(self.sim, spec.heuristic,
                                       self._verdict_down, self._verdict_up)
        self.router = ReactiveDV(self) if spec.family == Family.DV else ProactiveLS(self)
        self.counters = Counters()
        self.link_buffers: dict[tuple[int, int], list] = {}
        self.busy_until: dict[int, int] = {i: 0 for i in self.node_ids}
        self._flow_dests: dict[int, set[int]] = {i: set() for i in self.node_ids}
        for f in spec.flows:
            self._flow_dests[f.src].add(f.dst)
        self._pkt_counter = 0
        self._base_latency = ticks_from_ms(self.params.base_tx_delay_ms)
        self._jitter_ticks = ticks_from_ms(self.params.flood_jitter_ms)
        self._ssld_window = ticks_from_s(spec.heuristic.ssld_window_s)

    # ------------------------------------------------------------------ setup

    def run(self) -> RunResult:
        self._init_links()
        self.router.start()
        self._schedule_sampler(ticks_from_s(self.params.nds_interval_s))
        for flow in self.spec.flows:
            start = ticks_from_s(flow.start_s)
            stop = self.end_ticks if flow.stop_s is None else ticks_from_s(flow.stop_s)
            interval = ticks_from_s(flow.interval_s)
            self._schedule_flow(flow, start, stop, interval)
        for i in self.node_ids:
            nxt = self.trajs[i].next_change(0)
            if nxt is not None and nxt <= self.end_ticks:
                self.sim.schedule(nxt, MOBILITY_UPDATE,
                                  lambda n=i: self._leg_boundary(n),
                                  node=i, detail="leg")
        self.sim.run_until(self.end_ticks)
        return self._finalize()

    def _init_links(self) -> None:
        ids = self.node_ids
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                a, b = ids[ai], ids[bi]
                key = (a, b)
                pair = _Pair()
                pair.up = self._dist2(a, b, 0) <= self._range2
                self.pairs[key] = pair
                self.verdicts.link_init(key, pair.up)
                if pair.up:
                    self.phys_nbrs[a].add(b)
                    self.phys_nbrs[b].add(a)
                    self.verdict_nbrs[a].add(b)
                    self.verdict_nbrs[b].add(a)
                    self.metrics.on_link_event(key, True, 0)
                self._scan_pair(a, b, 0)

    # ------------------------------------------------- link flip detection

    def _dist2(self, a: int, b: int, t: int) -> float:
        la = self.trajs[a].leg_at(t)
        lb = self.trajs[b].leg_at(t)
        dx = la.x0 + la.vx_t * (t - la.t0) - (lb.x0 + lb.vx_t * (t - lb.t0))
        dy = la.y0 + la.vy_t * (t - la.t0) - (lb.y0 + lb.vy_t * (t - lb.t0))
        return dx * dx + dy * dy

    def _scan_pair(self, a: int, b: int, from_tick: int) -> None:
        """Schedule the next range-predicate flip for the pair, if one occurs
        before either node changes leg or the run ends."""
        pair = self.pairs[(a, b)]
        la = self.trajs[a].leg_at(from_tick)
        lb = self.trajs[b].leg_at(from_tick)
        window_end = self.end_ticks + 1
        if la.t1 is not None:
            window_end = min(window_end, la.t1)
        if lb.t1 is not None:
            window_end = min(window_end, lb.t1)
        if window_end <= from_tick + 1:
            return
        if la.paused and lb.paused:
            return  # both still: nothing can change until a leg boundary

        avx, avy = la.vx_t, la.vy_t
        bvx, bvy = lb.vx_t, lb.vy_t
        ax = avx - bvx
        ay = avy - bvy
        bx = (la.x0 - avx * la.t0) - (lb.x0 - bvx * lb.t0)
        by = (la.y0 - avy * la.t0) - (lb.y0 - bvy * lb.t0)
        qa = ax * ax + ay * ay
        qb = 2.0 * (ax * bx + ay * by)
        qc = bx * bx + by * by - self._range2

        roots: list[float] = []
        if qa != 0.0:
            disc = qb * qb - 4.0 * qa * qc
            if disc >= 0.0:
                sq = math.sqrt(disc)
                roots = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        elif qb != 0.0:
            roots = [-qc / qb]

        candidates = {from_tick + 1}
        for r in roots:
            if from_tick - 1.0 <= r <= window_end + 1.0:
                base = math.floor(r)
                candidates.update((base - 1, base, base + 1, base + 2))
        flip_at = None
        up = pair.up
        for k in sorted(candidates):
            if k <= from_tick or k >= window_end:
                continue
            if (self._dist2(a, b, k) <= self._range2) != up:
                flip_at = k
                break
        if flip_at is not None:
            pair.handle = self.sim.schedule(flip_at, MOBILITY_UPDATE,
                                            lambda: self._flip(a, b),
                                            node=a, detail=f"link {a}-{b}")

    def _flip(self, a: int, b: int) -> None:
        t = self.sim.now
        pair = self.pairs[(a, b)]
        pair.handle = None
        now_up = self._dist2(a, b, t) <= self._range2
        if now_up != pair.up:
            self._apply_flip(a, b, now_up, t)
        self._scan_pair(a, b, t)

    def _apply_flip(self, a: int, b: int, now_up: bool, t: int) -> None:
        key = (a, b)
        pair = self.pairs[key]
        pair.up = now_up
        if now_up:
            self.phys_nbrs[a].add(b)
            self.phys_nbrs[b].add(a)
        else:
            self.phys_nbrs[a].discard(b)
            self.phys_nbrs[b].discard(a)
        self.metrics.on_link_event(key, now_up, t)
        if now_up:
            self.verdicts.on_phys_up(key, t)
            self._flush_link_buffer(key)
        else:
            self.verdicts.on_phys_down(key, t)

    def _leg_boundary(self, i: int) -> None:
        t = self.sim.now
        nxt = self.trajs[i].next_change(t)
        if nxt is not None and nxt <= self.end_ticks:
            self.sim.schedule(nxt, MOBILITY_UPDATE, lambda: self._leg_boundary(i),
                              node=i, detail="leg")
        for j in self.node_ids:
            if j == i:
                continue
            key = link_key(i, j)
            pair = self.pairs[key]
            if pair.handle is not None:
                self.sim.cancel(pair.handle)
                pair.handle = None
            # The old scan window ended exactly here, so the boundary tick
            # itself has not been checked yet.
            now_up = self._dist2(key[0], key[1], t) <= self._range2
            if now_up != pair.up:
                self._apply_flip(key[0], key[1], now_up, t)
            self._scan_pair(key[0], key[1], t)

    # ------------------------------------------------------- verdict wiring

    def _verdict_down(self, link, t: int) -> None:
        a, b = link
        self.verdict_nbrs[a].discard(b)
        self.verdict_nbrs[b].discard(a)
        for _src, _dst, msg in self.link_buffers.pop(link, ()):  # expired in transit
            if isinstance(msg, DataPacket):
                self.count_drop("tentative_expired")
        self.router.on_verdict_down(link, t)

    def _verdict_up(self, link, t: int) -> None:
        a, b = link
        self.verdict_nbrs[a].add(b)
        self.verdict_nbrs[b].add(a)
        self.router.on_verdict_up(link, t)

    def _flush_link_buffer(self, link) -> None:
        held = self.link_buffers.pop(link, None)
        if not held:
            return
        for src, dst, msg in held:
            self.sim.schedule(self.sim.now, MSG_DELIVER,
                              lambda s=src, d=dst, m=msg: self._deliver(s, d, m),
                              node=dst, detail=f"{msg.kind} resumed {src}->{dst}")

    # ----------------------------------------------------------- messaging

    def up_neighbor_set(self, node: int) -> set[int]:
        return self.verdict_nbrs[node]

    def _latency(self, src: int) -> int:
        now = self.sim.now
        active = sum(1 for v in self.phys_nbrs[src] if self.busy_until[v] > now)
        lat = round(self._base_latency * (1.0 + self.params.contention_coeff * active))
        return max(1, lat)

    def _log_msg(self, src: int, to, msg) -> None:
        if self.msg_log is None:
            return
        origin = getattr(msg, "origin", getattr(msg, "sender", src))
        seq = getattr(msg, "seq", getattr(msg, "pkt_id", 0))
        self.msg_log.append(f"{fmt_ms(self.sim.now)},{msg.kind},{src},{to},"
                            f"{origin},{seq},{msg.size_bytes}")

    def broadcast(self, src: int, msg) -> None:
        lat = self._latency(src)
        self.busy_until[src] = max(self.busy_until[src], self.sim.now + lat)
        self.counters.control_msgs += 1
        self.counters.control_bytes += msg.size_bytes
        self._log_msg(src, "*", msg)
        for v in sorted(self.verdict_nbrs[src]):
            jitter = round(self.jitter_rng.uniform(-self._jitter_ticks, self._jitter_ticks))
            delay = max(1, lat + jitter)
            self.sim.schedule_in(delay, MSG_DELIVER,
                                 lambda s=src, d=v, m=msg: self._deliver(s, d, m),
                                 node=v, detail=f"{msg.kind} {src}->{v}")

    def unicast(self, src: int, dst: int, msg) -> None:
        if dst not in self.verdict_nbrs[src]:
            if isinstance(msg, DataPacket):
                self.count_drop("link_down")
            return
        lat = self._latency(src)
        self.busy_until[src] = max(self.busy_until[src], self.sim.now + lat)
        if not isinstance(msg, DataPacket):
            self.counters.control_msgs += 1
            self.counters.control_bytes += msg.size_bytes
        self._log_msg(src, dst, msg)
        self.sim.schedule_in(lat, MSG_DELIVER,
                             lambda s=src, d=dst, m=msg: self._deliver(s, d, m),
                             node=dst, detail=f"{msg.kind} {src}->{dst}")

    def _deliver(self, src: int, dst: int, msg) -> None:
        key = link_key(src, dst)
        if not self.pairs[key].up:
            if self.verdicts.is_tentative(key):
                self.link_buffers.setdefault(key, []).append((src, dst, msg))
            elif isinstance(msg, DataPacket):
                self.count_drop("link_down")
            return
        if isinstance(msg, DataPacket):
            self.send_data(dst, msg)
        else:
            self.router.on_message(dst, src, msg)

    # ----------------------------------------------------------- data plane

    def send_data(self, node: int, pkt: DataPacket) -> None:
        if node == pkt.dst:
            self.counters.pkts_delivered += 1
            self.counters.delay_sum_ticks += self.sim.now - pkt.created_at
            self.counters.delays_ticks.append(self.sim.now - pkt.created_at)
            return
        if pkt.hops >= self.params.ttl:
            self.count_drop("ttl")
            return
        nh = self.router.next_hop(node, pkt.dst)
        if nh is None:
            if not self.router.handle_no_route(node, pkt):
                self.count_drop("no_route")
            return
        if nh not in self.verdict_nbrs[node]:
            self.count_drop("link_down")
            return
        pkt.hops += 1
        self.unicast(node, nh, pkt)

    def _schedule_flow(self, flow, at: int, stop: int, interval: int) -> None:
        if at >= stop or at > self.end_ticks:
            return

        def fire():
            self._pkt_counter += 1
            pkt = DataPacket(self._pkt_counter, flow.src, flow.dst, flow.size_bytes,
                             created_at=self.sim.now)
            self.counters.pkts_sent += 1
            self.send_data(flow.src, pkt)
            self._schedule_flow(flow, self.sim.now + interval, stop, interval)

        self.sim.schedule(at, TRAFFIC_GEN, fire, node=flow.src,
                          detail=f"flow {flow.src}->{flow.dst}")

    # ------------------------------------------------------------- services

    def flow_dests(self, node: int) -> set[int]:
        return self._flow_dests[node]

    def count_drop(self, reason: str) -> None:
        self.counters.pkts_dropped += 1
        self.counters.drop_reasons[reason] = self.counters.drop_reasons.get(reason, 0) + 1

    def record_discovery(self, latency_ticks: int) -> None:
        self.counters.discovery_latencies.append(latency_ticks)

    def pause_time_stats(self, node: int) -> PauseStats:
        return PauseStats(node, self.trajs[node].pause_intervals(self.end_ticks))

    @property
    def ssld_filtering(self) -> bool:
        return self.spec.heuristic.kind == HeuristicKind.SSLD

    def stability_class(self, node: int, t: int) -> StabilityClass:
        if t < self._ssld_window:
            return StabilityClass.ROBUST
        cfg = self.spec.heuristic
        w = self._ssld_window
        return classify(self.metrics.mean_abs_nds(node, t, w),
                        self.metrics.alb(node, t, w), cfg)

    def successor_ok(self, node: int) -> bool:
        if not self.ssld_filtering:
            return True
        return successor_eligible(self.stability_class(node, self.sim.now))

    # ------------------------------------------------------------- sampling

    def _schedule_sampler(self, interval: int) -> None:
        def fire():
            t = self.sim.now
            degrees = self._true_degrees(t)
            n_static = n_moving = 0
            for i in self.node_ids:
                self.metrics.sample_degree(i, t, degrees[i])
                if t >= interval:
                    if self.trajs[i].stationary_throughout(t - interval, t):
                        n_static += 1
                    else:
                        n_moving += 1
            if t >= interval:
                self.metrics.sample_ratio(t, n_static, n_moving)
            nxt = t + interval
            if nxt <= self.end_ticks:
                self.sim.schedule(nxt, METRIC_SAMPLE, fire, detail="sample")

        self.sim.schedule(0, METRIC_SAMPLE, fire, detail="sample")

    def _true_degrees(self, t: int) -> dict[int, int]:
        """Degrees from the range predicate itself, immune to same-tick
        ordering between flip and sample events."""
        deg = {i: 0 for i in self.node_ids}
        ids = self.node_ids
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                if self._dist2(ids[ai], ids[bi], t) <= self._range2:
                    deg[ids[ai]] += 1
                    deg[ids[bi]] += 1
        return deg

    # ------------------------------------------------------------- results

    def _finalize(self) -> RunResult:
        end = self.end_ticks
        self.metrics.finalize(end)
        c = self.counters
        spec = self.spec
        cell = spec.cell
        closed = self.metrics.closed_durations()
        all_samples = [s for i in self.node_ids for s in self.metrics.samples[i]]
        pauses = {i: self.trajs[i].pause_intervals(end) for i in self.node_ids}
        total_pause = {i: sum(e - s for s, e in iv) for i, iv in pauses.items()}
        duration_s = spec.duration_s
        per_node = {}
        for i in self.node_ids:
            samples = self.metrics.samples[i]
            per_node[i] = {
                "mean_abs_nds": (sum(abs(s.nds) for s in samples) / len(samples)
                                 if samples else 0.0),
                "alb_per_s": len(self.metrics.down_times[i]) / duration_s,
                "total_pause_s": total_pause[i] / TICKS_PER_SECOND,
            }
        verdict_breaks = sum(1 for ep in self.verdicts.episodes
                             if ep.verdict_down is not None)
        return RunResult(
            name=spec.name, seed=spec.seed, duration_s=duration_s,
            n_nodes=len(self.node_ids), family=spec.family.value,
            heuristic=spec.heuristic.kind.value,
            pattern=cell.pattern if cell else "",
            density=cell.density if cell else "",
            frequency=cell.frequency if cell else "",
            link_length=cell.link_length if cell else "",
            recomputations=c.recomputations,
            control_msgs=c.control_msgs, control_bytes=c.control_bytes,
            pkts_sent=c.pkts_sent, pkts_delivered=c.pkts_delivered,
            pkts_dropped=c.pkts_dropped,
            mean_delay_ms=(c.delay_sum_ticks / c.pkts_delivered / 10.0
                           if c.pkts_delivered else 0.0),
            delivery_ratio=(c.pkts_delivered / c.pkts_sent if c.pkts_sent else 0.0),
            discoveries=len(c.discovery_latencies),
            discovery_latency_mean_ms=(sum(c.discovery_latencies)
                                       / len(c.discovery_latencies) / 10.0
                                       if c.discovery_latencies else 0.0),
            phys_link_breaks=self.metrics.phys_breaks,
            verdict_breaks=verdict_breaks,
            episodes_suppressed=self.verdicts.suppressed,
            mean_abs_nds=(sum(abs(s.nds) for s in all_samples) / len(all_samples)
                          if all_samples else 0.0),
            mean_alb_per_s=(sum(p["alb_per_s"] for p in per_node.values())
                            / len(per_node) if per_node else 0.0),
            mean_ld_s=(sum(closed) / len(closed) / TICKS_PER_SECOND if closed else 0.0),
            censored_links=self.metrics.censored_count(),
            mean_total_pause_s=(sum(p["total_pause_s"] for p in per_node.values())
                                / len(per_node) if per_node else 0.0),
            static_ratio_mean=(sum(s.ratio for s in self.metrics.ratio_samples)
                               / len(self.metrics.ratio_samples)
                               if self.metrics.ratio_samples else 0.0),
            per_node=per_node,
        )

    # ------------------------------------------------------------- exports

    def metrics_csv(self) -> str:
        window = ticks_from_s(self.params.alb_window_s)
        lines = ["time_ms,node_id,nd,nds,alb,paused"]
        n_samples = len(self.metrics.samples[self.node_ids[0]]) if self.node_ids else 0
        for k in range(n_samples):
            for i in self.node_ids:
                sample = self.metrics.samples[i][k]
                alb = self.metrics.alb(i, sample.t, window)
                paused = int(self.trajs[i].pose_at(sample.t).is_paused)
                lines.append(f"{fmt_ms(sample.t)},{i},{sample.nd_now},{sample.nds},"
                             f"{alb:.6f},{paused}")
        return "\n".join(lines) + "\n"

    def links_csv(self) -> str:
        lines = ["link,start_ms,end_ms,duration_ms,censored"]
        for rec in self.metrics.records:
            end = rec.end if rec.end is not None else self.end_ticks
            lines.append(f"{rec.link[0]}-{rec.link[1]},{fmt_ms(rec.start)},{fmt_ms(end)},"
                         f"{fmt_ms(end - rec.start)},{int(rec.censored)}")
        return "\n".join(lines) + "\n"

    def episodes_csv(self) -> str:
        lines = ["link,phys_down_ms,phys_up_ms,verdict_down_ms,heuristic"]
        lines.extend(self.verdicts.episode_rows())
        return "\n".join(lines) + "\n"

    def mobility_csv(self) -> str:
        step = ticks_from_s(self.params.mobility_trace_interval_s)
        lines = ["time_ms,node_id,x_m,y_m,vx,vy"]
        t = 0
        while t <= self.end_ticks:
            for i in self.node_ids:
                p = self.trajs[i].pose_at(t)
                lines.append(f"{fmt_ms(t)},{i},{p.x:.6f},{p.y:.6f},{p.vx:.6f},{p.vy:.6f}")
            t += step
        return "\n".join(lines) + "\n"

    def messages_csv(self) -> str:
        lines = ["time_ms,kind,from,to,origin,seq,size_bytes"]
        if self.msg_log:
            lines.extend(self.msg_log)
        return "\n".join(lines) + "\n"

    def events_trace(self) -> str:
        lines = ["time_ms\tseq\tkind\tnode\tdetail"]
        if self.trace_lines:
            lines.extend(self.trace_lines)
        return "\n".join(lines) + "\n"


def run_scenario(spec: ScenarioSpec, trace: bool = False) -> RunResult:
    return Simulation(spec, trace=trace).run()
