"""Scenario construction: run specs, tunable defaults, grid presets, file format.

All preset magnitudes live here so every knob of the comparison grid is
visible and overridable in one place.  The grid dimensions themselves
(movement pattern, density, movement frequency, link length, verdict policy,
routing family) are ordinal; the numbers below make them concrete.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from enum import Enum

from .engine import RngStream
from .heuristics import HeuristicConfig, HeuristicKind
from .linkmodel import RadioConfig
from .mobility import Confined, FreeWaypoint, MobilitySpec, PingPong, Static

# --- preset defaults (overridable per key through build_scenario) -----------

AREA_M = 300.0                      # square side for grid placement and roaming
RANGE_M = 50.0                      # radio range used by grid presets
DENSITY_NODES = {"low": 10, "high": 40}
SPACING_FRACTION = {"short": 0.3, "long": 0.9}   # grid spacing as fraction of range
MOVE_PERIOD_S = {"low": 60.0, "high": 2.0}       # confined/ping-pong cycle period
MOBILE_FRACTION = 0.3               # share of nodes carrying the cell's pattern
CONFINED_RADIUS_FRACTION = 0.2      # confinement radius as fraction of range
CONFINED_LEG_SPEED = 10.0
PINGPONG_PENETRATION_M = 5.0        # how far past the tightest link boundary a swing goes
PINGPONG_TRANSIT_S = 0.2            # swing one-way time; bounds any off-range episode
                                    # to 2 x this, well under the default tolerance
FREE_PAUSE_S = {"low": (20.0, 40.0), "high": (0.0, 2.0)}
FREE_SPEED = (2.0, 12.0)
MATRIX_DURATION_S = 15.0
FLOW_INTERVAL_S = 0.5
FLOW_SIZE_BYTES = 256
FLOW_START_S = 4.0                  # leaves proactive warm-up before traffic
RLD_SWEEP_S = (0.1, 0.5, 2.0)       # tolerance intervals worth sweeping
DEFAULT_SEEDS = (1, 2, 3)


class Family(str, Enum):
    DV = "dv"
    LS = "ls"


@dataclass(frozen=True)
class SimParams:
    """Per-run engine and protocol constants."""

    base_tx_delay_ms: float = 2.0
    contention_coeff: float = 0.1
    flood_jitter_ms: float = 0.5    # per-receiver jitter on broadcast control
    nds_interval_s: float = 1.0
    alb_window_s: float = 10.0
    hello_interval_s: float = 1.0
    tc_interval_s: float = 5.0
    tc_start_s: float = 2.0
    tc_min_interval_s: float = 0.5  # rate limit for change-triggered broadcasts
    neighbor_expiry_hellos: int = 3
    rreq_timeout_s: float = 1.0
    rreq_retries: int = 2
    ttl: int = 32
    mobility_trace_interval_s: float = 0.1


@dataclass(frozen=True)
class Flow:
    src: int
    dst: int
    interval_s: float = FLOW_INTERVAL_S
    size_bytes: int = FLOW_SIZE_BYTES
    start_s: float = 0.0
    stop_s: float | None = None     # None = run duration

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("flow endpoints must differ")
        if self.interval_s <= 0:
            raise ValueError("packet interval must be > 0")


@dataclass(frozen=True)
class MatrixCell:
    pattern: str       # confined | pingpong | free
    density: str       # low | high
    frequency: str     # low | high
    link_length: str   # short | long
    heuristic: HeuristicKind
    family: Family

    def __post_init__(self):
        if self.pattern not in ("confined", "pingpong", "free"):
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.density not in DENSITY_NODES:
            raise ValueError(f"unknown density {self.density!r}")
        if self.frequency not in MOVE_PERIOD_S:
            raise ValueError(f"unknown frequency {self.frequency!r}")
        if self.link_length not in SPACING_FRACTION:
            raise ValueError(f"unknown link length {self.link_length!r}")

    def key(self) -> str:
        return (f"{self.pattern}-{self.density}-{self.frequency}-{self.link_length}"
                f"-{self.heuristic.value}-{self.family.value}")


@dataclass
class ScenarioSpec:
    name: str
    duration_s: float
    seed: int
    nodes: dict[int, MobilitySpec]
    radio: RadioConfig = field(default_factory=RadioConfig)
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)
    family: Family = Family.DV
    flows: list[Flow] = field(default_factory=list)
    params: SimParams = field(default_factory=SimParams)
    cell: MatrixCell | None = None

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration must be > 0")
        for f in self.flows:
            if f.src not in self.nodes or f.dst not in self.nodes:
                raise ValueError(f"flow references unplaced node: {f}")


def grid_positions(n: int, spacing: float) -> list[tuple[float, float]]:
    cols = math.ceil(math.sqrt(n))
    return [((i % cols) * spacing, (i // cols) * spacing) for i in range(n)]


def table2_cells() -> list[MatrixCell]:
    """Full comparison grid: 3 patterns x 2 density x 2 frequency x 2 link
    lengths x 3 verdict policies x 2 families = 144 cells."""
    cells = []
    for pattern in ("confined", "pingpong", "free"):
        for density in ("low", "high"):
            for frequency in ("low", "high"):
                for link_length in ("short", "long"):
                    for heuristic in HeuristicKind:
                        for family in Family:
                            cells.append(MatrixCell(pattern, density, frequency,
                                                    link_length, heuristic, family))
    return cells


def build_scenario(cell: MatrixCell, seed: int, **overrides) -> ScenarioSpec:
    """Deterministic preset mapping from a grid cell to a runnable scenario.

    Accepted overrides: duration_s, rld_delta_t_s, n_flows, radio, params.
    """
    duration_s = overrides.pop("duration_s", MATRIX_DURATION_S)
    delta_t = overrides.pop("rld_delta_t_s", 0.5)
    n_flows = overrides.pop("n_flows", 3)
    radio = overrides.pop("radio", RadioConfig(range_m=RANGE_M))
    params = overrides.pop("params", SimParams())
    if overrides:
        raise TypeError(f"unknown overrides: {sorted(overrides)}")

    n = DENSITY_NODES[cell.density]
    spacing = SPACING_FRACTION[cell.link_length] * radio.range_m
    positions = grid_positions(n, spacing)
    cols = math.ceil(math.sqrt(n))

    layout_rng = RngStream(seed, "layout")
    n_mobile = round(MOBILE_FRACTION * n)
    mobile = set(layout_rng.sample(range(n), n_mobile))

    def farthest_in_range(i: int) -> tuple[int, float]:
        best_j, best_d = -1, -1.0
        for j, q in enumerate(positions):
            if j == i:
                continue
            d = math.dist(positions[i], q)
            if d <= radio.range_m and d > best_d:
                best_j, best_d = j, d
        return best_j, best_d

    def nearest(i: int) -> int:
        return min((j for j in range(n) if j != i),
                   key=lambda j: (math.dist(positions[i], positions[j]), j))

    period = MOVE_PERIOD_S[cell.frequency]
    nodes: dict[int, MobilitySpec] = {}
    swing_target: dict[int, int] = {}
    for i, pos in enumerate(positions):
        if i not in mobile:
            nodes[i] = Static(home=pos)
        elif cell.pattern == "confined":
            nodes[i] = Confined(home=pos, radius_m=CONFINED_RADIUS_FRACTION * radio.range_m,
                                move_period_s=period, leg_speed=CONFINED_LEG_SPEED)
        elif cell.pattern == "pingpong":
            # Swing directly away from the node's most marginal link, just past
            # its break boundary.  The fixed one-way transit time caps every
            # off-range episode at twice the transit regardless of geometry.
            j, d = farthest_in_range(i)
            swing_target[i] = j
            amp = (radio.range_m - d) + PINGPONG_PENETRATION_M
            ux = (pos[0] - positions[j][0]) / d
            uy = (pos[1] - positions[j][1]) / d
            far = (pos[0] + amp * ux, pos[1] + amp * uy)
            dwell_a = max(period - 2.0 * PINGPONG_TRANSIT_S, 0.0)
            nodes[i] = PingPong(pos_a=pos, pos_b=far, dwell_a_s=dwell_a, dwell_b_s=0.0,
                                transit_speed=amp / PINGPONG_TRANSIT_S)
        else:  # free
            pmin, pmax = FREE_PAUSE_S[cell.frequency]
            nodes[i] = FreeWaypoint(area=(0.0, 0.0, AREA_M, AREA_M),
                                    speed_min=FREE_SPEED[0], speed_max=FREE_SPEED[1],
                                    pause_min_s=pmin, pause_max_s=pmax)

    flow_pairs = [(0, n - 1), (cols - 1, n - cols), (n // 2, 0)]
    if mobile:
        # Probe flow across a mobile node's most fragile link, so link churn
        # is guaranteed to be routing-visible.
        probe_src = min(mobile)
        probe_dst = swing_target.get(probe_src, nearest(probe_src))
        flow_pairs.append((probe_src, probe_dst))
    flows = [Flow(src=a, dst=b, start_s=FLOW_START_S)
             for a, b in flow_pairs[:n_flows + 1] if a != b]

    heuristic = HeuristicConfig(kind=cell.heuristic, rld_delta_t_s=delta_t)
    return ScenarioSpec(name=f"{cell.key()}-s{seed}", duration_s=duration_s, seed=seed,
                        nodes=nodes, radio=radio, heuristic=heuristic,
                        family=cell.family, flows=flows, params=params, cell=cell)


# --- hand-built scenarios used by the verification suite and docs -----------

# Static layout realizing the example topology: hub S with three branches,
# where S-C-D is the 2-hop route and S-A-B-D / S-E-F-G-D are longer detours.
# Coordinates are tuned so the unit-disk graph at 100 m range has exactly the
# intended edges, with enough margin that float distance math is unambiguous.
TOPOLOGY_EXAMPLE_COORDS = {
    "S": (0.0, 0.0),
    "A": (45.0, 88.0),
    "B": (144.0, 83.0),
    "C": (98.0, 0.0),
    "D": (195.0, 0.0),
    "E": (30.0, -90.0),
    "F": (110.0, -130.0),
    "G": (195.0, -95.0),
}
TOPOLOGY_EXAMPLE_EDGES = {
    ("S", "A"), ("S", "C"), ("S", "E"), ("A", "B"), ("B", "C"), ("B", "D"),
    ("C", "D"), ("E", "F"), ("F", "G"), ("G", "D"),
}
TOPOLOGY_EXAMPLE_IDS = {name: i for i, name in enumerate(sorted(TOPOLOGY_EXAMPLE_COORDS))}
# C's retreated position keeps S-C and B-C but puts C-D out of range.
TOPOLOGY_EXAMPLE_C_RETREAT = (94.0, 0.0)


def topology_example_scenario(family: Family, heuristic: HeuristicConfig | None = None,
                              break_c_d: bool = False, duration_s: float = 30.0,
                              seed: int = 1) -> ScenarioSpec:
    """The branching example topology, static, with one flow S -> D.

    With break_c_d, node C retreats after 10 s just far enough to lose its
    link to D while keeping every other adjacency, forcing a re-route.
    """
    radio = RadioConfig(range_m=100.0)
    nodes: dict[int, MobilitySpec] = {}
    for name, pos in TOPOLOGY_EXAMPLE_COORDS.items():
        i = TOPOLOGY_EXAMPLE_IDS[name]
        if name == "C" and break_c_d:
            nodes[i] = PingPong(pos_a=pos, pos_b=TOPOLOGY_EXAMPLE_C_RETREAT,
                                dwell_a_s=10.0, dwell_b_s=10 * duration_s,
                                transit_speed=1.0)
        else:
            nodes[i] = Static(home=pos)
    s, d = TOPOLOGY_EXAMPLE_IDS["S"], TOPOLOGY_EXAMPLE_IDS["D"]
    return ScenarioSpec(
        name=f"topology-example-{family.value}" + ("-break" if break_c_d else ""),
        duration_s=duration_s, seed=seed, nodes=nodes, radio=radio,
        heuristic=heuristic or HeuristicConfig(), family=family,
        flows=[Flow(src=s, dst=d, interval_s=0.25, start_s=FLOW_START_S)])


def oscillation_scenario(heuristic: HeuristicConfig, duration_s: float = 28.0,
                         dwell_away_s: float = 1.0, seed: int = 1) -> ScenarioSpec:
    """Single-hop flow whose destination swings out of range and back.

    Node 1 oscillates between 40 m (in range) and 70 m (out of range at 50 m
    radio range) from the static source, at 10 m/s with a 5 s dwell in range:
    the link is physically down for exactly 4 s + dwell_away per cycle.
    """
    nodes = {
        0: Static(home=(0.0, 0.0)),
        1: PingPong(pos_a=(40.0, 0.0), pos_b=(70.0, 0.0), dwell_a_s=5.0,
                    dwell_b_s=dwell_away_s, transit_speed=10.0),
    }
    return ScenarioSpec(name=f"oscillation-{heuristic.kind.value}", duration_s=duration_s,
                        seed=seed, nodes=nodes, radio=RadioConfig(range_m=50.0),
                        heuristic=heuristic, family=Family.DV,
                        flows=[Flow(src=0, dst=1, interval_s=0.25, start_s=0.5)])


def departure_scenario(heuristic: HeuristicConfig, duration_s: float = 20.0,
                       seed: int = 1) -> ScenarioSpec:
    """Single-hop flow whose destination leaves for good (permanent break)."""
    nodes = {
        0: Static(home=(0.0, 0.0)),
        1: PingPong(pos_a=(40.0, 0.0), pos_b=(70.0, 0.0), dwell_a_s=5.0,
                    dwell_b_s=10 * duration_s, transit_speed=10.0),
    }
    return ScenarioSpec(name=f"departure-{heuristic.kind.value}", duration_s=duration_s,
                        seed=seed, nodes=nodes, radio=RadioConfig(range_m=50.0),
                        heuristic=heuristic, family=Family.DV,
                        flows=[Flow(src=0, dst=1, interval_s=0.25, start_s=0.5)])


def confined_neutrality_scenario(heuristic: HeuristicConfig, duration_s: float = 20.0,
                                 seed: int = 1) -> ScenarioSpec:
    """Tight cluster with confined movers that can never reach a break boundary.

    Spacing is 0.3 x range and confinement radius 0.2 x range; the cluster is
    kept small enough that max pairwise distance + 2 x radius < range, so the
    geometry rules out any link break and routing must stay silent under every
    verdict policy.
    """
    radio = RadioConfig(range_m=50.0)
    spacing = 0.3 * radio.range_m
    radius = 0.2 * radio.range_m
    corners = [(0.0, 0.0), (spacing, 0.0), (0.0, spacing), (spacing, spacing)]
    center = (spacing / 2.0, spacing / 2.0)
    positions = corners + [center]
    movers = {0, 3}
    nodes: dict[int, MobilitySpec] = {}
    for i, pos in enumerate(positions):
        if i in movers:
            nodes[i] = Confined(home=pos, radius_m=radius, move_period_s=2.0,
                                leg_speed=CONFINED_LEG_SPEED)
        else:
            nodes[i] = Static(home=pos)
    return ScenarioSpec(name=f"confined-neutral-{heuristic.kind.value}",
                        duration_s=duration_s, seed=seed, nodes=nodes, radio=radio,
                        heuristic=heuristic, family=Family.DV,
                        flows=[Flow(src=1, dst=2, interval_s=0.25, start_s=0.5),
                               Flow(src=0, dst=3, interval_s=0.25, start_s=0.5)])


def crossing_scenario(v_rel: float = 20.0, d_min: float = 30.0,
                      duration_s: float | None = None, seed: int = 1) -> ScenarioSpec:
    """Two nodes pass each other once on antiparallel straight lines."""
    half = v_rel / 2.0
    leg = 100.0
    if duration_s is None:
        duration_s = 4.0 * leg / v_rel + 2.0  # full pass plus slack
    nodes = {
        0: PingPong(pos_a=(-leg, d_min / 2.0), pos_b=(leg, d_min / 2.0),
                    dwell_a_s=0.0, dwell_b_s=10 * duration_s, transit_speed=half),
        1: PingPong(pos_a=(leg, -d_min / 2.0), pos_b=(-leg, -d_min / 2.0),
                    dwell_a_s=0.0, dwell_b_s=10 * duration_s, transit_speed=half),
    }
    return ScenarioSpec(name="crossing", duration_s=duration_s, seed=seed, nodes=nodes,
                        radio=RadioConfig(range_m=50.0),
                        heuristic=HeuristicConfig(), family=Family.DV, flows=[])


# --- flat key-value scenario file format -------------------------------------

def format_scenario(spec: ScenarioSpec) -> str:
    """Serialize to the flat sectioned key-value format (diff-friendly)."""
    cp = configparser.ConfigParser()
    cp["scenario"] = {
        "name": spec.name,
        "duration_s": repr(spec.duration_s),
        "seed": str(spec.seed),
        "family": spec.family.value,
    }
    r = spec.radio
    cp["radio"] = {
        "range_m": repr(r.range_m),
        "ref_snr_db": repr(r.ref_snr_db),
        "pathloss_exp": repr(r.pathloss_exp),
        "short_fraction": repr(r.short_fraction),
    }
    if r.snr_threshold_db is not None:
        cp["radio"]["snr_threshold_db"] = repr(r.snr_threshold_db)
    h = spec.heuristic
    cp["heuristic"] = {
        "kind": h.kind.value,
        "rld_delta_t_s": repr(h.rld_delta_t_s),
        "ssld_nds_threshold": repr(h.ssld_nds_threshold),
        "ssld_alb_threshold": repr(h.ssld_alb_threshold),
        "ssld_window_s": repr(h.ssld_window_s),
    }
    defaults = SimParams()
    p = spec.params
    changed = {k: repr(getattr(p, k)) for k in p.__dataclass_fields__
               if getattr(p, k) != getattr(defaults, k)}
    if changed:
        cp["params"] = changed
    for i in sorted(spec.nodes):
        spec_i = spec.nodes[i]
        sec = f"node {i}"
        if isinstance(spec_i, Static):
            cp[sec] = {"kind": "static", "x": repr(spec_i.home[0]), "y": repr(spec_i.home[1])}
        elif isinstance(spec_i, Confined):
            cp[sec] = {"kind": "confined", "x": repr(spec_i.home[0]), "y": repr(spec_i.home[1]),
                       "radius_m": repr(spec_i.radius_m),
                       "move_period_s": repr(spec_i.move_period_s),
                       "leg_speed": repr(spec_i.leg_speed)}
        elif isinstance(spec_i, PingPong):
            cp[sec] = {"kind": "pingpong",
                       "ax": repr(spec_i.pos_a[0]), "ay": repr(spec_i.pos_a[1]),
                       "bx": repr(spec_i.pos_b[0]), "by": repr(spec_i.pos_b[1]),
                       "dwell_a_s": repr(spec_i.dwell_a_s), "dwell_b_s": repr(spec_i.dwell_b_s),
                       "transit_speed": repr(spec_i.transit_speed)}
        elif isinstance(spec_i, FreeWaypoint):
            x0, y0, x1, y1 = spec_i.area
            cp[sec] = {"kind": "waypoint",
                       "x0": repr(x0), "y0": repr(y0), "x1": repr(x1), "y1": repr(y1),
                       "speed_min": repr(spec_i.speed_min), "speed_max": repr(spec_i.speed_max),
                       "pause_min_s": repr(spec_i.pause_min_s),
                       "pause_max_s": repr(spec_i.pause_max_s)}
    for k, f in enumerate(spec.flows):
        cp[f"flow {k}"] = {
            "src": str(f.src), "dst": str(f.dst),
            "interval_s": repr(f.interval_s), "size_bytes": str(f.size_bytes),
            "start_s": repr(f.start_s),
            **({"stop_s": repr(f.stop_s)} if f.stop_s is not None else {}),
        }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def parse_scenario(text: str, seed: int | None = None) -> ScenarioSpec:
    """Parse the sectioned key-value format; seed argument overrides the file."""
    cp = configparser.ConfigParser()
    cp.read_string(text)
    if "scenario" not in cp:
        raise ValueError("missing [scenario] section")
    sc = cp["scenario"]
    nodes: dict[int, MobilitySpec] = {}
    flows: list[Flow] = []
    for section in cp.sections():
        if section.startswith("node "):
            i = int(section.split(None, 1)[1])
            s = cp[section]
            kind = s.get("kind", "static")
            if kind == "static":
                nodes[i] = Static(home=(s.getfloat("x"), s.getfloat("y")))
            elif kind == "confined":
                nodes[i] = Confined(home=(s.getfloat("x"), s.getfloat("y")),
                                    radius_m=s.getfloat("radius_m"),
                                    move_period_s=s.getfloat("move_period_s"),
                                    leg_speed=s.getfloat("leg_speed"))
            elif kind == "pingpong":
                nodes[i] = PingPong(pos_a=(s.getfloat("ax"), s.getfloat("ay")),
                                    pos_b=(s.getfloat("bx"), s.getfloat("by")),
                                    dwell_a_s=s.getfloat("dwell_a_s"),
                                    dwell_b_s=s.getfloat("dwell_b_s"),
                                    transit_speed=s.getfloat("transit_speed"))
            elif kind == "waypoint":
                nodes[i] = FreeWaypoint(area=(s.getfloat("x0"), s.getfloat("y0"),
                                              s.getfloat("x1"), s.getfloat("y1")),
                                        speed_min=s.getfloat("speed_min"),
                                        speed_max=s.getfloat("speed_max"),
                                        pause_min_s=s.getfloat("pause_min_s"),
                                        pause_max_s=s.getfloat("pause_max_s"))
            else:
                raise ValueError(f"unknown mobility kind {kind!r} in [{section}]")
        elif section.startswith("flow "):
            s = cp[section]
            flows.append(Flow(src=s.getint("src"), dst=s.getint("dst"),
                              interval_s=s.getfloat("interval_s", FLOW_INTERVAL_S),
                              size_bytes=s.getint("size_bytes", FLOW_SIZE_BYTES),
                              start_s=s.getfloat("start_s", 0.0),
                              stop_s=s.getfloat("stop_s", fallback=None)))
    radio = RadioConfig()
    if "radio" in cp:
        r = cp["radio"]
        radio = RadioConfig(range_m=r.getfloat("range_m", 50.0),
                            ref_snr_db=r.getfloat("ref_snr_db", 60.0),
                            pathloss_exp=r.getfloat("pathloss_exp", 2.0),
                            snr_threshold_db=r.getfloat("snr_threshold_db", fallback=None),
                            short_fraction=r.getfloat("short_fraction", 0.5))
    heuristic = HeuristicConfig()
    if "heuristic" in cp:
        h = cp["heuristic"]
        heuristic = HeuristicConfig(kind=HeuristicKind(h.get("kind", "LD").upper()),
                                    rld_delta_t_s=h.getfloat("rld_delta_t_s", 0.5),
                                    ssld_nds_threshold=h.getfloat("ssld_nds_threshold", 0.5),
                                    ssld_alb_threshold=h.getfloat("ssld_alb_threshold", 0.2),
                                    ssld_window_s=h.getfloat("ssld_window_s", 10.0))
    params = SimParams()
    if "params" in cp:
        kwargs = {}
        for key in cp["params"]:
            if key not in SimParams.__dataclass_fields__:
                raise ValueError(f"unknown parameter {key!r} in [params]")
            current = getattr(params, key)
            raw = cp["params"][key]
            kwargs[key] = int(raw) if isinstance(current, int) else float(raw)
        params = SimParams(**kwargs)
    return ScenarioSpec(name=sc.get("name", "scenario"),
                        duration_s=sc.getfloat("duration_s"),
                        seed=seed if seed is not None else sc.getint("seed", 1),
                        nodes=nodes, radio=radio, heuristic=heuristic,
                        family=Family(sc.get("family", "dv").lower()),
                        flows=flows, params=params)
