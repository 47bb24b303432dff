"""Per-node mobility tracking: link lifetimes, neighbor-degree churn, break rates, pauses.

Tracks the evolving physical neighbor graph.  Link records are keyed by the
unordered node pair; a record still open at the end of a run is reported as
censored rather than folded into duration averages.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .engine import TICKS_PER_SECOND

Link = tuple[int, int]


def link_key(a: int, b: int) -> Link:
    return (a, b) if a < b else (b, a)


@dataclass
class LinkRecord:
    link: Link
    start: int
    end: int | None = None  # ticks; None while the link is still up

    @property
    def censored(self) -> bool:
        return self.end is None

    def duration(self, t_end: int) -> int:
        return (t_end if self.end is None else self.end) - self.start


@dataclass(frozen=True)
class DegreeSample:
    """Neighbor count at a sample instant and its change since the previous one."""

    node: int
    t: int
    nd_prev: int
    nd_now: int

    @property
    def nds(self) -> int:
        return self.nd_prev - self.nd_now


@dataclass(frozen=True)
class RatioSample:
    t: int
    n_static: int
    n_moving: int

    @property
    def ratio(self) -> float:
        return self.n_static / max(self.n_moving, 1)


@dataclass
class PauseStats:
    node: int
    intervals: list[tuple[int, int]] = field(default_factory=list)

    @property
    def total_ticks(self) -> int:
        return sum(e - s for s, e in self.intervals)

    @property
    def mean_s(self) -> float:
        if not self.intervals:
            return 0.0
        return self.total_ticks / len(self.intervals) / TICKS_PER_SECOND


class LinkEventError(Exception):
    """Raised on a duplicate up/up or down/down transition for the same link."""


class MetricsTracker:
    """Consumes physical link transitions and degree samples for one run."""

    def __init__(self, node_ids: list[int]):
        self.node_ids = list(node_ids)
        self.records: list[LinkRecord] = []
        self.open: dict[Link, LinkRecord] = {}
        self.down_times: dict[int, list[int]] = {n: [] for n in self.node_ids}
        self.samples: dict[int, list[DegreeSample]] = {n: [] for n in self.node_ids}
        self.ratio_samples: list[RatioSample] = []
        self.phys_breaks = 0

    def on_link_event(self, link: Link, up: bool, t: int) -> None:
        if up:
            if link in self.open:
                raise LinkEventError(f"link {link} reported up twice")
            rec = LinkRecord(link, start=t)
            self.open[link] = rec
            self.records.append(rec)
        else:
            rec = self.open.pop(link, None)
            if rec is None:
                raise LinkEventError(f"link {link} reported down twice")
            rec.end = t
            self.phys_breaks += 1
            for n in link:
                self.down_times[n].append(t)

    def sample_degree(self, node: int, t: int, nd_now: int) -> DegreeSample:
        prior = self.samples[node]
        nd_prev = prior[-1].nd_now if prior else nd_now
        s = DegreeSample(node, t, nd_prev, nd_now)
        prior.append(s)
        return s

    def sample_ratio(self, t: int, n_static: int, n_moving: int) -> RatioSample:
        s = RatioSample(t, n_static, n_moving)
        self.ratio_samples.append(s)
        return s

    def alb(self, node: int, t: int, window: int) -> float:
        """Break rate for incident links over the window (t - window, t], in breaks/s."""
        times = self.down_times[node]
        lo = bisect_right(times, t - window)
        hi = bisect_right(times, t)
        return (hi - lo) / (window / TICKS_PER_SECOND)

    def mean_abs_nds(self, node: int, t: int, window: int) -> float:
        """Mean |degree change| over samples in (t - window, t]; 0 with no samples."""
        samples = self.samples[node]
        if not samples:
            return 0.0
        ts = [s.t for s in samples]
        lo = bisect_right(ts, t - window)
        hi = bisect_right(ts, t)
        if hi == lo:
            return 0.0
        return sum(abs(samples[i].nds) for i in range(lo, hi)) / (hi - lo)

    def history_span(self, node: int) -> int:
        samples = self.samples[node]
        if not samples:
            return 0
        return samples[-1].t - samples[0].t

    def finalize(self, t_end: int) -> None:
        """Close out the run.  Open records stay open (censored); nothing to do
        beyond asserting the invariant that each open link has one record."""
        for link, rec in self.open.items():
            assert rec.end is None and rec.link == link

    # Convenience aggregates used by the run summary.

    def closed_durations(self) -> list[int]:
        return [r.end - r.start for r in self.records if r.end is not None]

    def censored_count(self) -> int:
        return len(self.open)

    def down_count(self, node: int, t0: int, t1: int) -> int:
        """Number of incident-link breaks in (t0, t1] for brute-force checks."""
        times = self.down_times[node]
        return bisect_right(times, t1) - bisect_right(times, t0)
