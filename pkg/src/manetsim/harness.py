"""Batch execution over the comparison grid, CSV emission, and ordering checks.

The grid is qualitative, so the report evaluates paired per-seed contrasts
(never means across seeds): the tolerance-interval policy must suppress
re-computation on oscillating links, confined movement over short links must
be invisible to routing, and long links must break more than short ones under
the same confined movement.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

from .scenarios import DEFAULT_SEEDS, MatrixCell, ScenarioSpec, build_scenario, table2_cells
from .simulation import RUNS_CSV_COLUMNS, RunResult, Simulation, result_row


class MatrixError(Exception):
    """A run inside a matrix failed; carries the offending cell and seed."""


def run(spec: ScenarioSpec, trace: bool = False) -> RunResult:
    return Simulation(spec, trace=trace).run()


def _run_cell(args) -> dict[str, str]:
    cell, seed, overrides = args
    try:
        spec = build_scenario(cell, seed, **overrides)
        return result_row(Simulation(spec).run())
    except Exception as exc:  # surfaced with the cell named
        raise MatrixError(f"cell {cell.key()} seed {seed}: {exc}") from exc


def run_matrix(cells: list[MatrixCell], seeds: list[int] | tuple[int, ...] = DEFAULT_SEEDS,
               jobs: int = 1, **overrides) -> list[dict[str, str]]:
    """One row per (cell, seed), ordered by cell key then seed.

    Cells are independent, so they may execute in parallel; the merge order is
    fixed regardless of jobs.
    """
    work = [(cell, seed, overrides) for cell in cells for seed in seeds]
    if jobs > 1 and len(work) > 1:
        with multiprocessing.Pool(jobs) as pool:
            rows = pool.map(_run_cell, work)
    else:
        rows = [_run_cell(w) for w in work]
    rows.sort(key=lambda r: (r["name"], int(r["seed"])))
    return rows


def format_runs_csv(rows: list[dict[str, str]]) -> str:
    lines = [",".join(RUNS_CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(row[col] for col in RUNS_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def parse_runs_csv(text: str) -> list[dict[str, str]]:
    lines = text.strip().splitlines()
    if not lines:
        return []
    header = lines[0].split(",")
    if header != RUNS_CSV_COLUMNS:
        raise ValueError("unexpected runs.csv column set")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


@dataclass(frozen=True)
class CheckResult:
    name: str
    subject: str
    passed: bool
    detail: str


def _index(rows):
    by_key = {}
    for r in rows:
        if not r["pattern"]:
            continue  # not a grid row
        key = (r["pattern"], r["density"], r["frequency"], r["link_length"],
               r["heuristic"], r["family"], int(r["seed"]))
        by_key[key] = r
    return by_key


def ordering_checks(rows: list[dict[str, str]]) -> list[CheckResult]:
    """Paired per-seed contrasts over whatever grid rows are present."""
    by_key = _index(rows)
    seeds = sorted({k[6] for k in by_key})
    checks: list[CheckResult] = []

    def recomp(pattern, density, frequency, length, heuristic, family, seed):
        row = by_key.get((pattern, density, frequency, length, heuristic, family, seed))
        return None if row is None else int(row["recomputations"])

    for density in ("low", "high"):
        for length in ("short", "long"):
            for family in ("dv", "ls"):
                for seed in seeds:
                    # oscillating movement: tolerance policy strictly reduces
                    # re-computation against the immediate baseline
                    ld = recomp("pingpong", density, "high", length, "LD", family, seed)
                    rld = recomp("pingpong", density, "high", length, "RLD", family, seed)
                    if ld is not None and rld is not None:
                        checks.append(CheckResult(
                            "pingpong_high_rld_lt_ld",
                            f"{density}/{length}/{family}/seed{seed}",
                            rld < ld, f"rld={rld} ld={ld}"))

    for density in ("low", "high"):
        for seed in seeds:
            # long links break under confined movement that short links mostly
            # absorb: strictly more re-computation on the long-spacing grid
            long_n = recomp("confined", density, "high", "long", "LD", "dv", seed)
            short_n = recomp("confined", density, "high", "short", "LD", "dv", seed)
            if long_n is not None and short_n is not None:
                checks.append(CheckResult(
                    "confined_high_long_gt_short",
                    f"{density}/LD/dv/seed{seed}",
                    long_n > short_n, f"long={long_n} short={short_n}"))

    return checks


def format_report(checks: list[CheckResult]) -> str:
    lines = []
    failed = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        if not c.passed:
            failed += 1
        lines.append(f"[{status}] {c.name} {c.subject}: {c.detail}")
    lines.append(f"SUMMARY: {len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def table2_matrix(seeds=DEFAULT_SEEDS, jobs: int = 1, **overrides):
    rows = run_matrix(table2_cells(), seeds, jobs=jobs, **overrides)
    return rows, ordering_checks(rows)
