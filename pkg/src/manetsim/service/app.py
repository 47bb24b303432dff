"""HTTP facade over the simulator: submit scenarios or grid runs, get results.

Every endpoint is a thin wrapper over the service functions below, which the
CLI calls directly in-process; file handling stays with the caller.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness import (MatrixError, format_report, format_runs_csv, ordering_checks,
                       parse_runs_csv, run_matrix)
from ..scenarios import table2_cells
from ..simulation import Simulation
from .models import (CheckModel, MatrixRequest, MatrixResponse, ReportRequest,
                     ReportResponse, RunResultModel, ScenarioModel, SimulateRequest,
                     SimulateResponse)


def simulate(req: SimulateRequest) -> SimulateResponse:
    sim = Simulation(req.scenario.to_spec(), trace=req.trace)
    result = sim.run()
    return SimulateResponse(
        result=RunResultModel.from_result(result),
        metrics_csv=sim.metrics_csv(),
        links_csv=sim.links_csv(),
        episodes_csv=sim.episodes_csv(),
        mobility_csv=sim.mobility_csv() if req.trace else None,
        messages_csv=sim.messages_csv() if req.trace else None,
        events_trace=sim.events_trace() if req.trace else None)


def matrix(req: MatrixRequest) -> MatrixResponse:
    cells = [c.to_cell() for c in req.cells]
    if req.preset == "table2":
        cells = table2_cells() + cells
    overrides = {}
    if req.duration_s is not None:
        overrides["duration_s"] = req.duration_s
    if req.rld_delta_t_s is not None:
        overrides["rld_delta_t_s"] = req.rld_delta_t_s
    rows = run_matrix(cells, seeds=req.seeds, jobs=req.jobs, **overrides)
    checks = ordering_checks(rows)
    return MatrixResponse(
        rows=rows, runs_csv=format_runs_csv(rows),
        checks=[CheckModel(**c.__dict__) for c in checks],
        all_passed=all(c.passed for c in checks),
        report=format_report(checks))


def report(req: ReportRequest) -> ReportResponse:
    checks = ordering_checks(parse_runs_csv(req.runs_csv))
    return ReportResponse(checks=[CheckModel(**c.__dict__) for c in checks],
                          all_passed=all(c.passed for c in checks),
                          report=format_report(checks))


def create_app() -> FastAPI:
    app = FastAPI(title="manetsim", version=__version__,
                  description="Mobility-aware multihop routing simulator")

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/presets")
    def presets():
        return {"table2": {"cells": len(table2_cells()),
                           "dimensions": ["pattern", "density", "frequency",
                                          "link_length", "heuristic", "family"]}}

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate_ep(req: SimulateRequest):
        try:
            return simulate(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/matrix", response_model=MatrixResponse)
    def matrix_ep(req: MatrixRequest):
        try:
            return matrix(req)
        except MatrixError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/report", response_model=ReportResponse)
    def report_ep(req: ReportRequest):
        try:
            return report(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/scenario/echo", response_model=ScenarioModel)
    def scenario_echo(model: ScenarioModel):
        # validation round trip: normalizes and returns the scenario
        return ScenarioModel.from_spec(model.to_spec())

    return app


app = create_app()
