"""Link verdict policies between the physical layer and routing.

Three policies decide when routing is told a link changed:

* LD    -- baseline: every physical transition is passed through immediately.
* RLD   -- a physical loss opens a tolerance window; if the link recovers
           inside it, routing never hears about the episode, otherwise the
           break is reported late by exactly the window length.
* SSLD  -- breaks are reported immediately (like LD) but successor choice is
           filtered by a per-node stability class derived from neighbor-degree
           churn and link-break rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .engine import Simulator, TIMER_EXPIRY, fmt_ms, ticks_from_s
from .metrics import Link


class HeuristicKind(str, Enum):
    LD = "LD"
    RLD = "RLD"
    SSLD = "SSLD"


@dataclass(frozen=True)
class HeuristicConfig:
    kind: HeuristicKind = HeuristicKind.LD
    rld_delta_t_s: float = 0.5
    ssld_nds_threshold: float = 0.5   # mean |degree change| per sample
    ssld_alb_threshold: float = 0.2   # breaks per second
    ssld_window_s: float = 10.0

    def __post_init__(self):
        if self.kind == HeuristicKind.RLD and self.rld_delta_t_s <= 0:
            raise ValueError("RLD tolerance interval must be > 0")
        if self.kind == HeuristicKind.SSLD:
            if self.ssld_nds_threshold <= 0 or self.ssld_alb_threshold <= 0:
                raise ValueError("SSLD thresholds must be > 0")
            if self.ssld_window_s <= 0:
                raise ValueError("SSLD window must be > 0")


class StabilityClass(Enum):
    ROBUST = "robust"            # low churn, low breaks
    RULE_OUT = "rule_out"        # low churn, high breaks
    GROUP_STABLE = "group_stable"  # high churn, low breaks
    VOLATILE = "volatile"        # high churn, high breaks


def classify(mean_abs_nds: float, alb_rate: float, cfg: HeuristicConfig) -> StabilityClass:
    """Total quadrant map over (degree churn, break rate) levels."""
    high_nds = mean_abs_nds >= cfg.ssld_nds_threshold
    high_alb = alb_rate >= cfg.ssld_alb_threshold
    if high_nds:
        return StabilityClass.VOLATILE if high_alb else StabilityClass.GROUP_STABLE
    return StabilityClass.RULE_OUT if high_alb else StabilityClass.ROBUST


def successor_eligible(cls: StabilityClass) -> bool:
    """Eligibility of a node as next hop; callers must still fall back to
    ineligible nodes when they are the only way to reach a destination."""
    return cls in (StabilityClass.ROBUST, StabilityClass.GROUP_STABLE)


@dataclass
class Episode:
    """One physical down episode of a link and how the policy surfaced it."""

    link: Link
    phys_down: int
    phys_up: int | None = None
    verdict_down: int | None = None  # None = suppressed (never reported)


class VerdictError(Exception):
    pass


class VerdictTracker:
    """Per-link verdict state machine driven by physical transitions.

    Callbacks fire when routing should see a change.  Under RLD a pending
    tolerance timer is cancelled by a recovery; if the recovery lands on the
    same tick as the deadline, the timer wins because it was scheduled first.
    """

    UP = "up"
    TENTATIVE = "tentative"
    DOWN = "down"

    def __init__(self, sim: Simulator, cfg: HeuristicConfig,
                 notify_down: Callable[[Link, int], None],
                 notify_up: Callable[[Link, int], None]):
        self.sim = sim
        self.cfg = cfg
        self.notify_down = notify_down
        self.notify_up = notify_up
        self.state: dict[Link, str] = {}
        self._timers: dict[Link, object] = {}
        self._phys_open: dict[Link, Episode] = {}  # down episodes awaiting recovery
        self.episodes: list[Episode] = []
        self.suppressed = 0
        self._delta_ticks = ticks_from_s(cfg.rld_delta_t_s)

    def link_init(self, link: Link, up: bool) -> None:
        self.state[link] = self.UP if up else self.DOWN

    def is_up(self, link: Link) -> bool:
        return self.state.get(link, self.DOWN) != self.DOWN

    def is_tentative(self, link: Link) -> bool:
        return self.state.get(link) == self.TENTATIVE

    def on_phys_down(self, link: Link, t: int) -> None:
        if self.state.get(link) != self.UP:
            raise VerdictError(f"physical down for link {link} not in verdict-up state")
        ep = Episode(link, phys_down=t)
        self.episodes.append(ep)
        self._phys_open[link] = ep
        if self.cfg.kind == HeuristicKind.RLD:
            self.state[link] = self.TENTATIVE
            self._timers[link] = self.sim.schedule_in(
                self._delta_ticks, TIMER_EXPIRY,
                lambda l=link: self._deadline(l),
                node=link[0], detail=f"tolerance {link[0]}-{link[1]}")
        else:
            self.state[link] = self.DOWN
            ep.verdict_down = t
            self.notify_down(link, t)

    def on_phys_up(self, link: Link, t: int) -> None:
        state = self.state.get(link, self.DOWN)
        if state == self.UP:
            raise VerdictError(f"physical up for link {link} already verdict-up")
        ep = self._phys_open.pop(link, None)
        if ep is not None:
            ep.phys_up = t
        if state == self.TENTATIVE:
            # Recovered inside the tolerance window: no routing event at all.
            self.sim.cancel(self._timers.pop(link))
            self.state[link] = self.UP
            self.suppressed += 1
        else:
            self.state[link] = self.UP
            self.notify_up(link, t)

    def _deadline(self, link: Link) -> None:
        t = self.sim.now
        assert self.state.get(link) == self.TENTATIVE
        self._timers.pop(link, None)
        self._phys_open[link].verdict_down = t
        self.state[link] = self.DOWN
        self.notify_down(link, t)

    def episode_rows(self) -> list[str]:
        """CSV rows: link,phys_down_ms,phys_up_ms|never,verdict_down_ms|suppressed,heuristic."""
        rows = []
        for ep in self.episodes:
            up = fmt_ms(ep.phys_up) if ep.phys_up is not None else "never"
            vd = fmt_ms(ep.verdict_down) if ep.verdict_down is not None else "suppressed"
            rows.append(f"{ep.link[0]}-{ep.link[1]},{fmt_ms(ep.phys_down)},{up},{vd},"
                        f"{self.cfg.kind.value}")
        return rows
