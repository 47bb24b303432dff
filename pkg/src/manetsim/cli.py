"""Command-line client: parses arguments and scenario files, calls the service
layer, and writes result files.  `serve` starts the HTTP API."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .scenarios import parse_scenario
from .service.models import (MatrixRequest, ReportRequest, ScenarioModel,
                             SimulateRequest)


def _cmd_simulate(args) -> int:
    from .service import simulate

    text = Path(args.scenario).read_text()
    spec = parse_scenario(text, seed=args.seed)
    req = SimulateRequest(scenario=ScenarioModel.from_spec(spec), trace=args.trace)
    resp = simulate(req)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = resp.result.name
    (out / f"metrics_{run}.csv").write_text(resp.metrics_csv)
    (out / f"links_{run}.csv").write_text(resp.links_csv)
    (out / f"episodes_{run}.csv").write_text(resp.episodes_csv)
    if args.trace:
        (out / f"mobility_{run}.csv").write_text(resp.mobility_csv)
        (out / f"messages_{run}.csv").write_text(resp.messages_csv)
        (out / f"trace_{run}.tsv").write_text(resp.events_trace)
    r = resp.result
    print(f"{run}: sent={r.pkts_sent} delivered={r.pkts_delivered} "
          f"recomputations={r.recomputations} control={r.control_msgs} "
          f"mean_delay_ms={r.mean_delay_ms:.3f}")
    print(f"outputs in {out}")
    return 0


def _cmd_matrix(args) -> int:
    from .service import matrix
    from .service.models import MatrixResponse

    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [1, 2, 3]
    req = MatrixRequest(preset=args.preset, seeds=seeds, jobs=args.jobs,
                        duration_s=args.duration, rld_delta_t_s=args.delta_t)
    try:
        resp: MatrixResponse = matrix(req)
    except Exception as exc:
        print(f"matrix failed: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "runs.csv").write_text(resp.runs_csv)
    (out / "ordering_report.txt").write_text(resp.report)
    print(resp.report, end="")
    print(f"{len(resp.rows)} rows -> {out / 'runs.csv'}")
    return 0 if resp.all_passed else 1


def _cmd_report(args) -> int:
    from .service import report

    runs = Path(args.indir) / "runs.csv"
    if not runs.exists():
        print(f"no runs.csv under {args.indir}", file=sys.stderr)
        return 2
    resp = report(ReportRequest(runs_csv=runs.read_text()))
    (Path(args.indir) / "ordering_report.txt").write_text(resp.report)
    print(resp.report, end="")
    return 0 if resp.all_passed else 1


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("manetsim.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetsim",
                                description="Mobility-aware multihop routing simulator")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario file")
    sim.add_argument("--scenario", required=True, help="scenario file path")
    sim.add_argument("--seed", type=int, default=None,
                     help="override the seed in the file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--trace", action="store_true",
                     help="also write mobility, message, and event traces")
    sim.set_defaults(fn=_cmd_simulate)

    mat = sub.add_parser("matrix", help="run the comparison grid")
    mat.add_argument("--preset", default="table2", choices=["table2"])
    mat.add_argument("--seeds", default="1,2,3", help="comma-separated seed list")
    mat.add_argument("--out", required=True, help="output directory")
    mat.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    mat.add_argument("--duration", type=float, default=None,
                     help="override run duration in seconds")
    mat.add_argument("--delta-t", type=float, default=None, dest="delta_t",
                     help="override the RLD tolerance interval in seconds")
    mat.set_defaults(fn=_cmd_matrix)

    rep = sub.add_parser("report", help="re-evaluate ordering checks from runs.csv")
    rep.add_argument("--in", dest="indir", required=True, help="directory with runs.csv")
    rep.set_defaults(fn=_cmd_report)

    srv = sub.add_parser("serve", help="start the HTTP API")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(fn=_cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
