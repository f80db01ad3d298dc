"""Two-stage multi-type solving: independent per-type searches, then
conflict elimination so no region hosts more than one facility type."""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .assignment import build_assignment, apply_swap, edge_deltas, loss_per_facility
from .instances import ProblemInstance
from .swap_search import EdgeSelector, EpisodeConfig, Solution, StepRecord, run_episode

MFLP_ENUM_LIMIT = 10_000_000


@dataclass
class MflpStep:
    ftype: str
    insert: int
    remove: int
    delta: float

    def to_json_dict(self) -> dict:
        return {
            "type": self.ftype,
            "insert": self.insert,
            "remove": self.remove,
            "delta": self.delta,
        }


@dataclass
class MflpSolution:
    placements: dict[str, list[int]]
    per_type_ac: dict[str, float]
    total_ac: float
    stage_one_steps: dict[str, list[StepRecord]]
    stage_two_steps: list[MflpStep]
    wall_time_ms: float = 0.0
    stage_one_ms: float = 0.0
    stage_two_ms: float = 0.0

    def to_json_dict(self, include_timings: bool = False) -> dict:
        steps = []
        for k, recs in self.stage_one_steps.items():
            steps.extend(dict(r.to_json_dict(), type=k) for r in recs)
        steps.extend(s.to_json_dict() for s in self.stage_two_steps)
        return {
            "type_placements": {k: [int(v) for v in ids] for k, ids in self.placements.items()},
            "access_cost": self.total_ac,
            "per_type_access_cost": dict(self.per_type_ac),
            "steps": steps,
            "wall_time_ms": self.wall_time_ms if include_timings else 0.0,
            "stage_logs": {
                "stage_one": {
                    k: [r.to_json_dict() for r in recs]
                    for k, recs in self.stage_one_steps.items()
                },
                "stage_two": [s.to_json_dict() for s in self.stage_two_steps],
                "stage_one_ms": self.stage_one_ms if include_timings else 0.0,
                "stage_two_ms": self.stage_two_ms if include_timings else 0.0,
            },
        }


def validate_pins(instance: ProblemInstance, pinned: Mapping[str, Iterable[int]]):
    """Pins must reference known types and valid nodes, fit inside the
    per-type budgets, and be disjoint across types."""
    seen: dict[int, str] = {}
    clean: dict[str, set[int]] = {}
    for k, nodes in pinned.items():
        if k not in instance.budgets:
            raise ValueError(f"unknown facility type {k!r} in pins")
        nodes = set(int(v) for v in nodes)
        for v in nodes:
            if not 0 <= v < instance.n:
                raise ValueError(f"pinned node {v} out of range")
            if v in seen:
                raise ValueError(
                    f"node {v} pinned for both {seen[v]!r} and {k!r}; "
                    "types are mutually exclusive per region"
                )
            seen[v] = k
        if len(nodes) > instance.budgets[k]:
            raise ValueError(
                f"{len(nodes)} pins exceed budget {instance.budgets[k]} for type {k!r}"
            )
        clean[k] = nodes
    return clean


def stage_one(
    instance: ProblemInstance,
    selector: EdgeSelector,
    config: EpisodeConfig,
    pinned: Mapping[str, Iterable[int]] | None = None,
) -> dict[str, Solution]:
    """Solve each type independently; placements may overlap across types."""
    pins = validate_pins(instance, pinned or {})
    out: dict[str, Solution] = {}
    for k in instance.types:
        p = instance.budgets[k]
        type_pins = pins.get(k, set())
        if len(type_pins) == p:
            state = build_assignment(instance, k, type_pins)
            out[k] = Solution(
                ftype=k,
                facilities=[int(v) for v in state.facilities],
                ac=state.ac,
                steps=[],
                ac_trace=[state.ac],
                wall_time_ms=0.0,
                wired_edges_per_step=[],
                full_edges_per_step=[],
            )
        else:
            out[k] = run_episode(instance, k, p, selector, config, pinned=type_pins)
    return out


def detect_conflicts(placements: Mapping[str, Iterable[int]]) -> dict[int, list[str]]:
    """Nodes hosting more than one type, with the offending types in
    declaration order. Empty iff the incompatibility constraint holds."""
    hosts: dict[int, list[str]] = {}
    for k, nodes in placements.items():
        for v in nodes:
            hosts.setdefault(int(v), []).append(k)
    return {v: ks for v, ks in hosts.items() if len(ks) > 1}


def stage_two_resolve(
    instance: ProblemInstance,
    placements: Mapping[str, Iterable[int]],
    pinned: Mapping[str, Iterable[int]] | None = None,
) -> MflpSolution:
    """Eliminate conflicts: at each conflicted node (taken in descending
    conflicting demand) the type that is most expensive to relocate stays
    and every other type takes its cheapest swap to a globally free node.

    Inserting only at nodes unoccupied by every type guarantees no new
    conflict appears, so the loop terminates.
    """
    t0 = time.perf_counter()
    pins = validate_pins(instance, pinned or {})
    states = {}
    for k in instance.types:
        ids = sorted(set(int(v) for v in placements[k]))
        if len(ids) != instance.budgets[k]:
            raise ValueError(
                f"type {k!r} has {len(ids)} placements, budget is {instance.budgets[k]}"
            )
        states[k] = build_assignment(instance, k, ids)
    log: list[MflpStep] = []

    while True:
        conflicts = detect_conflicts({k: s.facilities for k, s in states.items()})
        if not conflicts:
            break
        weight = {
            v: sum(float(instance.demands[k][v]) for k in ks)
            for v, ks in conflicts.items()
        }
        order = sorted(conflicts, key=lambda v: (-weight[v], v))
        for v in order:
            types_here = conflicts[v]
            pinned_here = [k for k in types_here if v in pins.get(k, set())]
            if pinned_here:
                keeper = pinned_here[0]
            else:
                # relocating a type's only facility is treated as infinitely
                # expensive; ties go to the first declared type
                losses = []
                for k in types_here:
                    if states[k].p < 2:
                        losses.append(np.inf)
                    else:
                        losses.append(float(loss_per_facility(states[k])[v]))
                keeper = types_here[int(np.argmax(losses))]
            occupied = set()
            for s in states.values():
                occupied.update(int(f) for f in s.facilities)
            for k in types_here:
                if k == keeper:
                    continue
                free = np.array(
                    sorted(set(range(instance.n)) - occupied), dtype=np.int64
                )
                if free.shape[0] == 0:
                    raise RuntimeError(
                        "no free node to relocate to; total budget must exceed n"
                    )
                edges = np.stack([free, np.full_like(free, v)], axis=1)
                deltas = edge_deltas(states[k], edges)
                best = int(np.argmin(deltas))
                insert = int(free[best])
                states[k] = apply_swap(states[k], insert, v)
                occupied.add(insert)
                log.append(
                    MflpStep(ftype=k, insert=insert, remove=v, delta=float(deltas[best]))
                )

    per_type_ac = {k: float(s.ac) for k, s in states.items()}
    return MflpSolution(
        placements={k: [int(f) for f in s.facilities] for k, s in states.items()},
        per_type_ac=per_type_ac,
        total_ac=float(sum(per_type_ac[k] for k in instance.types)),
        stage_one_steps={},
        stage_two_steps=log,
        stage_two_ms=(time.perf_counter() - t0) * 1000.0,
    )


def solve_mflp(
    instance: ProblemInstance,
    selector: EdgeSelector,
    config: EpisodeConfig,
    pinned: Mapping[str, Iterable[int]] | None = None,
    stage_one_solutions: Mapping[str, Solution] | None = None,
) -> MflpSolution:
    """Stage one then stage two; single-type instances reduce to plain FLP."""
    t0 = time.perf_counter()
    if stage_one_solutions is None:
        stage_one_solutions = stage_one(instance, selector, config, pinned)
    t1 = time.perf_counter()
    resolved = stage_two_resolve(
        instance,
        {k: sol.facilities for k, sol in stage_one_solutions.items()},
        pinned,
    )
    resolved.stage_one_steps = {k: sol.steps for k, sol in stage_one_solutions.items()}
    resolved.stage_one_ms = (t1 - t0) * 1000.0
    resolved.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    return resolved


def _placement_count(n: int, budgets: list[int]) -> int:
    total = 1
    remaining = n
    for p in budgets:
        total *= comb(remaining, p)
        remaining -= p
    return total


def mflp_brute_force(instance: ProblemInstance) -> MflpSolution:
    """Joint optimum over disjoint per-type placements, by enumeration."""
    t0 = time.perf_counter()
    budgets = [instance.budgets[k] for k in instance.types]
    count = _placement_count(instance.n, budgets)
    if count > MFLP_ENUM_LIMIT:
        raise ValueError(
            f"{count} disjoint placements exceed the enumeration limit {MFLP_ENUM_LIMIT}"
        )
    n = instance.n
    dmat = instance.columns(np.arange(n))
    types = instance.types
    hs = [instance.demands[k] for k in types]
    best_total = np.inf
    best: list[tuple[int, ...]] | None = None

    def recurse(level: int, remaining: list[int], acc: list[tuple[int, ...]], cost: float):
        nonlocal best_total, best
        if cost >= best_total:
            return
        if level == len(types):
            best_total = cost
            best = list(acc)
            return
        p = budgets[level]
        for subset in combinations(remaining, p):
            ac = float(np.dot(hs[level], dmat[:, list(subset)].min(axis=1)))
            chosen = set(subset)
            recurse(
                level + 1,
                [v for v in remaining if v not in chosen],
                acc + [subset],
                cost + ac,
            )

    recurse(0, list(range(n)), [], 0.0)
    placements = {k: sorted(best[i]) for i, k in enumerate(types)}
    per_type_ac = {
        k: float(np.dot(instance.demands[k], dmat[:, placements[k]].min(axis=1)))
        for k in types
    }
    return MflpSolution(
        placements={k: list(map(int, v)) for k, v in placements.items()},
        per_type_ac=per_type_ac,
        total_ac=float(sum(per_type_ac[k] for k in types)),
        stage_one_steps={},
        stage_two_steps=[],
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
    )
