import pytest

from manetsim.harness import (CheckResult, MatrixError, format_report, format_runs_csv,
                              ordering_checks, parse_runs_csv, run_matrix)
from manetsim.heuristics import HeuristicKind
from manetsim.scenarios import Family, MatrixCell
from manetsim.simulation import RUNS_CSV_COLUMNS


def small_cells():
    return [
        MatrixCell("pingpong", "low", "high", "short", HeuristicKind.LD, Family.DV),
        MatrixCell("pingpong", "low", "high", "short", HeuristicKind.RLD, Family.DV),
    ]


def test_run_matrix_row_count_and_order():
    rows = run_matrix(small_cells(), seeds=[2, 1])
    assert len(rows) == 4
    names = [r["name"] for r in rows]
    assert names == sorted(names)
    assert [r["seed"] for r in rows[:2]] == ["1", "2"]


def test_empty_matrix_gives_header_only_csv():
    text = format_runs_csv([])
    assert text == ",".join(RUNS_CSV_COLUMNS) + "\n"
    assert parse_runs_csv(text) == []


def test_runs_csv_round_trip_and_determinism():
    rows1 = run_matrix(small_cells(), seeds=[1])
    rows2 = run_matrix(small_cells(), seeds=[1])
    assert format_runs_csv(rows1) == format_runs_csv(rows2)
    assert parse_runs_csv(format_runs_csv(rows1)) == rows1


def test_cell_results_independent_of_batch():
    [alone] = run_matrix(small_cells()[:1], seeds=[1])
    batch = run_matrix(small_cells(), seeds=[1])
    matching = [r for r in batch if r["name"] == alone["name"]]
    assert matching == [alone]


def test_ordering_checks_pingpong_contrast():
    rows = run_matrix(small_cells(), seeds=[1, 2])
    checks = ordering_checks(rows)
    pingpong = [c for c in checks if c.name == "pingpong_high_rld_lt_ld"]
    assert len(pingpong) == 2  # one per seed
    assert all(c.passed for c in pingpong)


def test_ordering_checks_skip_missing_cells():
    rows = run_matrix(small_cells()[:1], seeds=[1])  # LD only, no RLD partner
    assert ordering_checks(rows) == []


def test_format_report_lines():
    checks = [CheckResult("a", "x", True, "1 < 2"),
              CheckResult("b", "y", False, "3 !< 2")]
    report = format_report(checks)
    assert "[PASS] a x: 1 < 2" in report
    assert "[FAIL] b y: 3 !< 2" in report
    assert report.strip().endswith("SUMMARY: 1/2 checks passed")


def test_matrix_error_names_cell():
    bad = MatrixCell("pingpong", "low", "high", "short", HeuristicKind.LD, Family.DV)
    with pytest.raises(MatrixError, match="pingpong-low-high-short-LD-dv seed 1"):
        run_matrix([bad], seeds=[1], duration_s=-5.0)


def test_parse_runs_csv_rejects_wrong_columns():
    with pytest.raises(ValueError):
        parse_runs_csv("a,b,c\n1,2,3\n")


def test_run_matrix_parallel_merge_matches_serial():
    rows_serial = run_matrix(small_cells(), seeds=[1, 2], jobs=1)
    rows_par = run_matrix(small_cells(), seeds=[1, 2], jobs=2)
    assert rows_serial == rows_par
