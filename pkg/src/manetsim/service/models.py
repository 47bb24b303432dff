"""Pydantic request/response models for the HTTP API and the CLI client.

These mirror the core dataclasses; converters translate in both directions so
the service and the command line share one validated schema.
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field, model_validator

from .. import mobility
from ..heuristics import HeuristicConfig, HeuristicKind
from ..linkmodel import RadioConfig
from ..scenarios import Family, Flow, MatrixCell, ScenarioSpec, SimParams
from ..simulation import RunResult


class StaticModel(BaseModel):
    kind: Literal["static"] = "static"
    x: float
    y: float


class ConfinedModel(BaseModel):
    kind: Literal["confined"] = "confined"
    x: float
    y: float
    radius_m: float = Field(gt=0)
    move_period_s: float = Field(gt=0)
    leg_speed: float = Field(gt=0)


class PingPongModel(BaseModel):
    kind: Literal["pingpong"] = "pingpong"
    ax: float
    ay: float
    bx: float
    by: float
    dwell_a_s: float = Field(ge=0)
    dwell_b_s: float = Field(ge=0)
    transit_speed: float = Field(gt=0)


class WaypointModel(BaseModel):
    kind: Literal["waypoint"] = "waypoint"
    x0: float
    y0: float
    x1: float
    y1: float
    speed_min: float = Field(gt=0)
    speed_max: float
    pause_min_s: float = Field(ge=0)
    pause_max_s: float


MobilityModel = Union[StaticModel, ConfinedModel, PingPongModel, WaypointModel]


class NodeModel(BaseModel):
    id: int
    mobility: MobilityModel = Field(discriminator="kind")


class RadioModel(BaseModel):
    range_m: float = 50.0
    ref_snr_db: float = 60.0
    pathloss_exp: float = 2.0
    snr_threshold_db: float | None = None
    short_fraction: float = 0.5


class HeuristicModel(BaseModel):
    kind: Literal["LD", "RLD", "SSLD"] = "LD"
    rld_delta_t_s: float = 0.5
    ssld_nds_threshold: float = 0.5
    ssld_alb_threshold: float = 0.2
    ssld_window_s: float = 10.0


class FlowModel(BaseModel):
    src: int
    dst: int
    interval_s: float = Field(default=0.5, gt=0)
    size_bytes: int = 256
    start_s: float = 0.0
    stop_s: float | None = None


class ParamsModel(BaseModel):
    base_tx_delay_ms: float = 2.0
    contention_coeff: float = 0.1
    flood_jitter_ms: float = 0.5
    nds_interval_s: float = 1.0
    alb_window_s: float = 10.0
    hello_interval_s: float = 1.0
    tc_interval_s: float = 5.0
    tc_start_s: float = 2.0
    tc_min_interval_s: float = 0.5
    neighbor_expiry_hellos: int = 3
    rreq_timeout_s: float = 1.0
    rreq_retries: int = 2
    ttl: int = 32
    mobility_trace_interval_s: float = 0.1


class ScenarioModel(BaseModel):
    name: str = "scenario"
    duration_s: float = Field(gt=0)
    seed: int = 1
    family: Literal["dv", "ls"] = "dv"
    radio: RadioModel = RadioModel()
    heuristic: HeuristicModel = HeuristicModel()
    params: ParamsModel = ParamsModel()
    nodes: list[NodeModel]
    flows: list[FlowModel] = []

    @model_validator(mode="after")
    def _flows_reference_nodes(self):
        ids = {n.id for n in self.nodes}
        if len(ids) != len(self.nodes):
            raise ValueError("duplicate node ids")
        for f in self.flows:
            if f.src not in ids or f.dst not in ids:
                raise ValueError(f"flow {f.src}->{f.dst} references an unplaced node")
        return self

    def to_spec(self) -> ScenarioSpec:
        nodes = {}
        for n in self.nodes:
            m = n.mobility
            if isinstance(m, StaticModel):
                nodes[n.id] = mobility.Static(home=(m.x, m.y))
            elif isinstance(m, ConfinedModel):
                nodes[n.id] = mobility.Confined(home=(m.x, m.y), radius_m=m.radius_m,
                                                move_period_s=m.move_period_s,
                                                leg_speed=m.leg_speed)
            elif isinstance(m, PingPongModel):
                nodes[n.id] = mobility.PingPong(pos_a=(m.ax, m.ay), pos_b=(m.bx, m.by),
                                                dwell_a_s=m.dwell_a_s,
                                                dwell_b_s=m.dwell_b_s,
                                                transit_speed=m.transit_speed)
            else:
                nodes[n.id] = mobility.FreeWaypoint(area=(m.x0, m.y0, m.x1, m.y1),
                                                    speed_min=m.speed_min,
                                                    speed_max=m.speed_max,
                                                    pause_min_s=m.pause_min_s,
                                                    pause_max_s=m.pause_max_s)
        return ScenarioSpec(
            name=self.name, duration_s=self.duration_s, seed=self.seed, nodes=nodes,
            radio=RadioConfig(**self.radio.model_dump()),
            heuristic=HeuristicConfig(kind=HeuristicKind(self.heuristic.kind),
                                      rld_delta_t_s=self.heuristic.rld_delta_t_s,
                                      ssld_nds_threshold=self.heuristic.ssld_nds_threshold,
                                      ssld_alb_threshold=self.heuristic.ssld_alb_threshold,
                                      ssld_window_s=self.heuristic.ssld_window_s),
            family=Family(self.family),
            flows=[Flow(**f.model_dump()) for f in self.flows],
            params=SimParams(**self.params.model_dump()))

    @classmethod
    def from_spec(cls, spec: ScenarioSpec) -> "ScenarioModel":
        nodes = []
        for i in sorted(spec.nodes):
            m = spec.nodes[i]
            if isinstance(m, mobility.Static):
                mm: MobilityModel = StaticModel(x=m.home[0], y=m.home[1])
            elif isinstance(m, mobility.Confined):
                mm = ConfinedModel(x=m.home[0], y=m.home[1], radius_m=m.radius_m,
                                   move_period_s=m.move_period_s, leg_speed=m.leg_speed)
            elif isinstance(m, mobility.PingPong):
                mm = PingPongModel(ax=m.pos_a[0], ay=m.pos_a[1], bx=m.pos_b[0],
                                   by=m.pos_b[1], dwell_a_s=m.dwell_a_s,
                                   dwell_b_s=m.dwell_b_s, transit_speed=m.transit_speed)
            else:
                x0, y0, x1, y1 = m.area
                mm = WaypointModel(x0=x0, y0=y0, x1=x1, y1=y1, speed_min=m.speed_min,
                                   speed_max=m.speed_max, pause_min_s=m.pause_min_s,
                                   pause_max_s=m.pause_max_s)
            nodes.append(NodeModel(id=i, mobility=mm))
        r = spec.radio
        h = spec.heuristic
        return cls(name=spec.name, duration_s=spec.duration_s, seed=spec.seed,
                   family=spec.family.value,
                   radio=RadioModel(range_m=r.range_m, ref_snr_db=r.ref_snr_db,
                                    pathloss_exp=r.pathloss_exp,
                                    snr_threshold_db=r.snr_threshold_db,
                                    short_fraction=r.short_fraction),
                   heuristic=HeuristicModel(kind=h.kind.value,
                                            rld_delta_t_s=h.rld_delta_t_s,
                                            ssld_nds_threshold=h.ssld_nds_threshold,
                                            ssld_alb_threshold=h.ssld_alb_threshold,
                                            ssld_window_s=h.ssld_window_s),
                   params=ParamsModel(**{k: getattr(spec.params, k)
                                         for k in SimParams.__dataclass_fields__}),
                   nodes=nodes,
                   flows=[FlowModel(src=f.src, dst=f.dst, interval_s=f.interval_s,
                                    size_bytes=f.size_bytes, start_s=f.start_s,
                                    stop_s=f.stop_s) for f in spec.flows])


class RunResultModel(BaseModel):
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
    recomputations: int
    control_msgs: int
    control_bytes: int
    pkts_sent: int
    pkts_delivered: int
    pkts_dropped: int
    mean_delay_ms: float
    delivery_ratio: float
    discoveries: int
    discovery_latency_mean_ms: float
    phys_link_breaks: int
    verdict_breaks: int
    episodes_suppressed: int
    mean_abs_nds: float
    mean_alb_per_s: float
    mean_ld_s: float
    censored_links: int
    mean_total_pause_s: float
    static_ratio_mean: float
    per_node: dict[int, dict[str, float]] = {}

    @classmethod
    def from_result(cls, r: RunResult) -> "RunResultModel":
        return cls(**{f: getattr(r, f) for f in cls.model_fields})


class SimulateRequest(BaseModel):
    scenario: ScenarioModel
    trace: bool = False


class SimulateResponse(BaseModel):
    result: RunResultModel
    metrics_csv: str
    links_csv: str
    episodes_csv: str
    mobility_csv: str | None = None
    messages_csv: str | None = None
    events_trace: str | None = None


class CellModel(BaseModel):
    pattern: Literal["confined", "pingpong", "free"]
    density: Literal["low", "high"]
    frequency: Literal["low", "high"]
    link_length: Literal["short", "long"]
    heuristic: Literal["LD", "RLD", "SSLD"]
    family: Literal["dv", "ls"]

    def to_cell(self) -> MatrixCell:
        return MatrixCell(self.pattern, self.density, self.frequency, self.link_length,
                          HeuristicKind(self.heuristic), Family(self.family))


class MatrixRequest(BaseModel):
    preset: Literal["table2"] | None = None
    cells: list[CellModel] = []
    seeds: list[int] = [1, 2, 3]
    jobs: int = Field(default=1, ge=1)
    duration_s: float | None = None
    rld_delta_t_s: float | None = None

    @model_validator(mode="after")
    def _preset_or_cells(self):
        if self.preset is None and not self.cells:
            raise ValueError("provide a preset or an explicit cell list")
        return self


class CheckModel(BaseModel):
    name: str
    subject: str
    passed: bool
    detail: str


class MatrixResponse(BaseModel):
    rows: list[dict[str, str]]
    runs_csv: str
    checks: list[CheckModel]
    all_passed: bool
    report: str


class ReportRequest(BaseModel):
    runs_csv: str


class ReportResponse(BaseModel):
    checks: list[CheckModel]
    all_passed: bool
    report: str
