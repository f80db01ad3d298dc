"""Experiment driver: seeded instance grids, solver races, gap/speedup
tables in csv, markdown, or json."""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import baselines
from .instances import ProblemInstance, generate_synthetic
from .policy import PolicyParams, PolicySelector, init_params, load_checkpoint
from .swap_search import EpisodeConfig, GreedyDeltaSelector, run_episode

EPISODE_METHODS = ("drl", "greedy")
KNOWN_METHODS = ("bf", "ls", "ts", "vns", "ga", "drl", "greedy")

DEFAULT_CELLS = [(100, 10), (300, 30), (1000, 100)]


@dataclass
class GridSpec:
    cells: list[tuple[int, int]] = field(default_factory=lambda: list(DEFAULT_CELLS))
    instances_per_cell: int = 20
    seed_base: int = 0
    solvers: list[str] = field(default_factory=lambda: ["ls", "vns", "ga", "drl"])
    demand_model: str = "uniform"
    steps_factor: int = 3  # episode budget K = steps_factor * p
    bf_limit: int = 20_000  # enumerate the reference when C(n,p) is below this
    policy_path: str | None = None
    reference_acs: dict[str, float] | None = None  # "ci:ii" -> externally solved AC

    def __post_init__(self):
        if self.instances_per_cell < 1:
            raise ValueError("instances_per_cell must be >= 1")
        for name in self.solvers:
            if name not in KNOWN_METHODS:
                raise ValueError(f"unknown solver {name!r}; known: {KNOWN_METHODS}")

    @classmethod
    def from_json(cls, path) -> "GridSpec":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        return cls(
            cells=[tuple(c) for c in raw.get("cells", DEFAULT_CELLS)],
            instances_per_cell=raw.get("instances_per_cell", 20),
            seed_base=raw.get("seed_base", 0),
            solvers=list(raw.get("solvers", ["ls", "vns", "ga", "drl"])),
            demand_model=raw.get("demand_model", "uniform"),
            steps_factor=raw.get("steps_factor", 3),
            bf_limit=raw.get("bf_limit", 20_000),
            policy_path=raw.get("policy_path"),
            reference_acs=raw.get("reference_acs"),
        )


def solve_with(
    method: str,
    instance: ProblemInstance,
    ftype: str,
    p: int,
    seed: int,
    steps: int,
    params: PolicyParams | None = None,
) -> baselines.SolverReport:
    """Uniform entry point used by the grid runner and the CLI."""
    if method == "bf":
        return baselines.brute_force(instance, ftype, p)
    if method == "ls":
        return baselines.local_search(instance, ftype, p)
    if method == "ts":
        return baselines.tabu_search(instance, ftype, p, iterations=max(steps, 1))
    if method == "vns":
        return baselines.vns(instance, ftype, p, iterations=max(steps // 3, 5), seed=seed)
    if method == "ga":
        return baselines.genetic(instance, ftype, p, seed=seed)
    if method in EPISODE_METHODS:
        if method == "drl":
            selector = PolicySelector(
                params if params is not None else init_params(seed=0), mode="greedy"
            ).bind(instance)
        else:
            selector = GreedyDeltaSelector()
        sol = run_episode(
            instance, ftype, p, selector, EpisodeConfig(max_steps=steps, seed=seed)
        )
        return baselines.SolverReport(
            method=method,
            facilities=sol.facilities,
            ac=sol.ac,
            wall_time_ms=sol.wall_time_ms,
            iterations=len(sol.steps),
            evaluations=int(sum(sol.wired_edges_per_step)),
            extra={
                "wired_per_step": sol.wired_edges_per_step,
                "full_per_step": sol.full_edges_per_step,
                "ac_trace": sol.ac_trace,
            },
        )
    raise ValueError(f"unknown solver {method!r}")


def _run_cell_instance(args):
    spec_dict, ci, ii, params = args
    spec = GridSpec(**spec_dict)
    n, p = spec.cells[ci]
    seed = spec.seed_base + ci + ii
    instance = generate_synthetic(n, {"a": p}, seed, spec.demand_model)
    if n <= 2000:
        instance.precompute_distances()
    out = {}
    for method in spec.solvers:
        rep = solve_with(method, instance, "a", p, seed, spec.steps_factor * p, params)
        out[method] = rep
    ref_ac = None
    ref_label = "best-of-all"
    if comb(n, p) <= spec.bf_limit:
        ref = out.get("bf") or baselines.brute_force(instance, "a", p)
        ref_ac, ref_label = ref.ac, "optimal"
        ref_rt = ref.wall_time_ms
    elif spec.reference_acs and f"{ci}:{ii}" in spec.reference_acs:
        ref_ac, ref_label = float(spec.reference_acs[f"{ci}:{ii}"]), "external"
        ref_rt = None
    else:
        ref_ac = min(rep.ac for rep in out.values())
        ref_rt = None
    return ci, ii, out, ref_ac, ref_label, ref_rt


def run_grid(spec: GridSpec, jobs: int = 1) -> list[dict]:
    """Race the configured solvers over the grid; one result row per
    (cell, method) with means across the cell's instances."""
    params = None
    if spec.policy_path and any(m == "drl" for m in spec.solvers):
        params = load_checkpoint(spec.policy_path)
    tasks = [
        (spec.__dict__.copy(), ci, ii, params)
        for ci in range(len(spec.cells))
        for ii in range(spec.instances_per_cell)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_run_cell_instance, tasks))
    else:
        raw = [_run_cell_instance(t) for t in tasks]
    raw.sort(key=lambda r: (r[0], r[1]))

    rows = []
    for ci, (n, p) in enumerate(spec.cells):
        per_inst = [r for r in raw if r[0] == ci]
        ref_label = per_inst[0][4]
        ref_rts = [r[5] for r in per_inst if r[5] is not None]
        mean_rts = {
            m: float(np.mean([r[2][m].wall_time_ms for r in per_inst]))
            for m in spec.solvers
        }
        if ref_rts:
            speed_base = float(np.mean(ref_rts))
        else:
            speed_base = max(mean_rts.values()) if mean_rts else 0.0
        for method in spec.solvers:
            acs = [r[2][method].ac for r in per_inst]
            gaps = []
            for r in per_inst:
                ref_ac = r[3]
                ac = r[2][method].ac
                if ref_ac > 0:
                    gaps.append((ac - ref_ac) / ref_ac * 100.0)
                else:
                    gaps.append(0.0 if ac <= 1e-12 else float("inf"))
            rt = mean_rts[method]
            speedup = speed_base / rt if rt > 0 else 1.0
            wired = [
                c
                for r in per_inst
                for c in r[2][method].extra.get("wired_per_step", [])
            ]
            full = [
                c
                for r in per_inst
                for c in r[2][method].extra.get("full_per_step", [])
            ]
            rows.append(
                {
                    "method": method,
                    "cell": f"N{n}_p{p}",
                    "mean_ac": float(np.mean(acs)),
                    "gap_pct": float(np.mean(gaps)),
                    "mean_rt_ms": rt,
                    "speedup": float(speedup),
                    "reference": ref_label,
                    "mean_wired_per_step": float(np.mean(wired)) if wired else None,
                    "mean_full_per_step": float(np.mean(full)) if full else None,
                }
            )
    return rows


REPORT_COLUMNS = [
    "method",
    "cell",
    "mean_ac",
    "gap_pct",
    "mean_rt_ms",
    "speedup",
    "reference",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def report(results: list[dict], fmt: str, path, include_timings: bool = True) -> None:
    """Emit the result table; output is byte-stable for fixed input."""
    rows = []
    for r in results:
        row = dict(r)
        if not include_timings:
            row["mean_rt_ms"] = 0.0
            row["speedup"] = 1.0
        rows.append(row)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(REPORT_COLUMNS)
            for r in rows:
                writer.writerow([_fmt(r.get(c)) for c in REPORT_COLUMNS])
    elif fmt == "markdown":
        with open(path, "w", encoding="utf-8") as f:
            f.write("| " + " | ".join(REPORT_COLUMNS) + " |\n")
            f.write("|" + "|".join(["---"] * len(REPORT_COLUMNS)) + "|\n")
            for r in rows:
                f.write("| " + " | ".join(_fmt(r.get(c)) for c in REPORT_COLUMNS) + " |\n")
    elif fmt == "json":
        payload = [
            {
                c: (round(r.get(c), 6) if isinstance(r.get(c), float) else r.get(c))
                for c in REPORT_COLUMNS
            }
            for r in rows
        ]
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=1)
            f.write("\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def wiring_table(results: list[dict]) -> list[dict]:
    """Per-cell comparison of wired candidate counts against the full
    swap-graph size for the episode-driven methods."""
    out = []
    for r in results:
        if r.get("mean_wired_per_step") is None:
            continue
        out.append(
            {
                "method": r["method"],
                "cell": r["cell"],
                "mean_wired_per_step": r["mean_wired_per_step"],
                "mean_full_per_step": r["mean_full_per_step"],
                "reduction_pct": 100.0
                * (1.0 - r["mean_wired_per_step"] / r["mean_full_per_step"]),
            }
        )
    return out
