import csv
import json

import numpy as np
import pytest

from facloc.bench import GridSpec, report, run_grid, solve_with, wiring_table
from facloc.instances import generate_synthetic

TIMING_KEYS = ("mean_rt_ms", "speedup")


def small_spec(**overrides):
    base = dict(
        cells=[(12, 2), (15, 3)],
        instances_per_cell=3,
        seed_base=100,
        solvers=["ls", "greedy", "drl"],
    )
    base.update(overrides)
    return GridSpec(**base)


def strip_timings(rows):
    return [{k: v for k, v in r.items() if k not in TIMING_KEYS} for r in rows]


class TestRunGrid:
    def test_rows_shape(self):
        rows = run_grid(small_spec())
        assert len(rows) == 2 * 3  # cells x solvers
        assert {r["cell"] for r in rows} == {"N12_p2", "N15_p3"}
        assert all(r["reference"] == "optimal" for r in rows)

    def test_gap_nonnegative_vs_optimal(self):
        rows = run_grid(small_spec())
        for r in rows:
            assert r["gap_pct"] >= -1e-9

    def test_reference_vs_itself_zero_gap(self):
        rows = run_grid(small_spec(solvers=["bf"]))
        for r in rows:
            assert r["gap_pct"] == pytest.approx(0.0, abs=1e-12)
            assert r["speedup"] == pytest.approx(1.0)

    def test_determinism(self):
        a = strip_timings(run_grid(small_spec()))
        b = strip_timings(run_grid(small_spec()))
        assert a == b

    def test_jobs_parallel_same_result(self):
        a = strip_timings(run_grid(small_spec()))
        b = strip_timings(run_grid(small_spec(), jobs=2))
        assert a == b

    def test_best_of_all_label_when_not_enumerable(self):
        rows = run_grid(small_spec(bf_limit=1, solvers=["ls", "greedy"]))
        assert all(r["reference"] == "best-of-all" for r in rows)
        assert min(r["gap_pct"] for r in rows) == pytest.approx(0.0, abs=1e-9)

    def test_unknown_solver_rejected(self):
        with pytest.raises(ValueError, match="unknown solver"):
            GridSpec(cells=[(10, 2)], solvers=["nope"])

    def test_wiring_counts_present_for_episode_methods(self):
        rows = run_grid(small_spec())
        table = wiring_table(rows)
        assert {t["method"] for t in table} == {"greedy", "drl"}
        for t in table:
            assert t["mean_wired_per_step"] <= t["mean_full_per_step"]


class TestSolveWith:
    def test_all_methods_run(self):
        inst = generate_synthetic(15, {"a": 3}, seed=5).precompute_distances()
        acs = {}
        for method in ("bf", "ls", "ts", "vns", "ga", "drl", "greedy"):
            rep = solve_with(method, inst, "a", 3, seed=1, steps=9)
            acs[method] = rep.ac
            assert len(rep.facilities) == 3
        assert min(acs.values()) == pytest.approx(acs["bf"])


class TestReport:
    def _rows(self):
        return run_grid(small_spec(solvers=["ls", "greedy"]))

    def test_empty_results_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        report([], "csv", path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("method,cell")

    def test_csv_round_trip(self, tmp_path):
        rows = self._rows()
        path = tmp_path / "out.csv"
        report(rows, "csv", path)
        with open(path) as f:
            parsed = list(csv.DictReader(f))
        assert len(parsed) == len(rows)
        for raw, row in zip(parsed, rows):
            assert raw["method"] == row["method"]
            assert float(raw["mean_ac"]) == pytest.approx(row["mean_ac"], abs=1e-6)
            assert float(raw["gap_pct"]) == pytest.approx(row["gap_pct"], abs=1e-6)

    def test_stable_bytes_without_timings(self, tmp_path):
        rows = self._rows()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        report(rows, "csv", p1, include_timings=False)
        report(strip_timings_roundtrip(rows), "csv", p2, include_timings=False)
        assert p1.read_bytes() == p2.read_bytes()

    def test_markdown_and_json(self, tmp_path):
        rows = self._rows()
        report(rows, "markdown", tmp_path / "t.md")
        report(rows, "json", tmp_path / "t.json")
        md = (tmp_path / "t.md").read_text()
        assert md.startswith("| method |")
        doc = json.loads((tmp_path / "t.json").read_text())
        assert len(doc) == len(rows)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            report([], "xml", tmp_path / "t.xml")


def strip_timings_roundtrip(rows):
    # fresh dicts with scrambled timing values: they must not leak into
    # the timing-free report
    out = []
    for r in rows:
        r = dict(r)
        r["mean_rt_ms"] = 123.456
        r["speedup"] = 9.9
        out.append(r)
    return out
