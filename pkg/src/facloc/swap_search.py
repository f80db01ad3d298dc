"""Swap-graph search: greedy construction, dynamic edge wiring, episodes.

The swap graph connects every vacant node to every occupied node; taking
an edge moves the facility from its occupied endpoint to the vacant one.
Wiring filters out edges touching recently swapped (tabu) nodes and edges
that provably increase the access cost (far apart with gain below loss).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from .assignment import (
    AssignmentState,
    all_swap_deltas,
    apply_swap,
    build_assignment,
    edge_deltas,
    far_radius_per_facility,
    gain_per_node,
    loss_per_facility,
    swap_components,
)
from .instances import ProblemInstance

IMPROVE_EPS = 1e-12


@dataclass
class TabuList:
    """Nodes barred from swaps until their expiry step."""

    tenure: int
    entries: dict[int, int] = field(default_factory=dict)

    def is_tabu(self, node: int, t: int) -> bool:
        return self.entries.get(int(node), t) > t

    def add(self, node: int, t: int):
        self.entries[int(node)] = t + self.tenure

    def mask(self, nodes: np.ndarray, t: int) -> np.ndarray:
        return np.fromiter(
            (self.is_tabu(v, t) for v in nodes), dtype=bool, count=len(nodes)
        )


@dataclass
class EpisodeConfig:
    max_steps: int
    tabu_tenure: int = 7
    aspiration: bool = True
    seed: int = 0
    fallback_scan: bool = True  # scan for improving edges when wiring is empty

    def __post_init__(self):
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.tabu_tenure < 0:
            raise ValueError("tabu_tenure must be >= 0")


@dataclass
class StepContext:
    """Frozen view of one decision point handed to the edge selector."""

    state: AssignmentState
    edges: np.ndarray  # (m, 2) columns [insert, remove], lexicographic
    gain: np.ndarray  # per-node gain, zero on occupied nodes
    loss: np.ndarray  # per-node loss, zero on vacant nodes
    step_index: int
    full_edge_count: int
    nb_pruned: int = 0
    tabu_pruned: int = 0


class EdgeSelector(Protocol):
    def choose(self, ctx: StepContext, rng: np.random.Generator) -> int: ...


@dataclass
class StepRecord:
    insert: int
    remove: int
    delta: float

    def to_json_dict(self) -> dict:
        return {"insert": self.insert, "remove": self.remove, "delta": self.delta}


@dataclass
class Solution:
    """Best placement visited by an episode plus the full step log."""

    ftype: str
    facilities: list[int]
    ac: float
    steps: list[StepRecord]
    ac_trace: list[float]
    wall_time_ms: float
    wired_edges_per_step: list[int]
    full_edges_per_step: list[int]
    local_optimum: bool = False
    final_facilities: list[int] = field(default_factory=list)

    def to_json_dict(self, include_timings: bool = False) -> dict:
        return {
            "type_placements": {self.ftype: [int(f) for f in self.facilities]},
            "access_cost": self.ac,
            "steps": [s.to_json_dict() for s in self.steps],
            "wall_time_ms": self.wall_time_ms if include_timings else 0.0,
        }


def greedy_init(
    instance: ProblemInstance,
    ftype: str,
    p: int,
    pinned: Iterable[int] = (),
) -> np.ndarray:
    """Myopic construction: repeatedly add the node with the largest access
    cost reduction, ties toward the lower id."""
    n = instance.n
    if not 1 <= p <= n:
        raise ValueError(f"budget must lie in 1..{n}, got {p}")
    h = instance.demands[ftype]
    chosen = sorted(set(int(v) for v in pinned))
    if len(chosen) > p:
        raise ValueError(f"{len(chosen)} pinned nodes exceed budget {p}")
    if chosen and (chosen[0] < 0 or chosen[-1] >= n):
        raise ValueError("pinned node out of range")
    d1 = None
    if chosen:
        d1 = instance.columns(np.asarray(chosen, dtype=np.int64)).min(axis=1)
    in_set = np.zeros(n, dtype=bool)
    in_set[chosen] = True
    while len(chosen) < p:
        best_j, best_score = -1, -np.inf
        idx = np.arange(n)
        for start in range(0, n, 1024):
            cols = idx[start : start + 1024]
            dmat = instance.columns(cols)
            if d1 is None:
                scores = -(dmat.T @ h)  # first pick: minimize plain cost
            else:
                scores = np.maximum(0.0, d1[:, None] - dmat).T @ h
            scores[in_set[cols]] = -np.inf
            local = int(np.argmax(scores))  # argmax takes the first maximum
            if scores[local] > best_score:
                best_score = float(scores[local])
                best_j = int(cols[local])
        dj = instance.dist_to_all(best_j)
        d1 = dj if d1 is None else np.minimum(d1, dj)
        chosen.append(best_j)
        in_set[best_j] = True
    return np.asarray(sorted(chosen), dtype=np.int64)


@dataclass
class WiringResult:
    edges: np.ndarray
    gain: np.ndarray
    loss: np.ndarray
    full_edge_count: int
    nb_pruned: int
    tabu_pruned: int


def wire(
    state: AssignmentState,
    tabu: TabuList,
    step_t: int,
    best_ac_so_far: float,
    aspiration: bool = True,
    pinned: frozenset[int] | set[int] = frozenset(),
) -> WiringResult:
    """Candidate edges surviving the tabu and negative-benefit filters.

    A tabu edge survives only if its exact delta would beat the best access
    cost seen so far (aspiration). A far-apart edge whose gain falls short
    of its loss is pruned as provably worsening.
    """
    if state.p < 2:
        raise ValueError("wiring needs at least two facilities")
    instance = state.instance
    occ = state.facilities
    if pinned:
        occ = occ[~np.isin(occ, list(pinned))]
    vacant, gains, dv = gain_per_node(state)
    loss_full = loss_per_facility(state)
    far = far_radius_per_facility(state)

    gain_full = np.zeros(instance.n)
    gain_full[vacant] = gains

    if occ.shape[0] == 0:
        return WiringResult(
            edges=np.zeros((0, 2), dtype=np.int64),
            gain=gain_full,
            loss=loss_full,
            full_edge_count=0,
            nb_pruned=0,
            tabu_pruned=0,
        )

    # d(remove, insert) for every pair, (|vacant|, |occ|)
    d_ri = dv[occ].T
    ac = state.ac
    margin = 1e-12 * max(1.0, abs(ac))
    far_apart = d_ri >= far[occ][None, :]
    negative = far_apart & (loss_full[occ][None, :] - gains[:, None] > margin)

    tabu_v = tabu.mask(vacant, step_t)
    tabu_o = tabu.mask(occ, step_t)
    tabu_edge = tabu_v[:, None] | tabu_o[None, :]

    keep = ~negative & ~tabu_edge
    n_tabu_pruned = 0
    if tabu_edge.any():
        cand = np.argwhere(tabu_edge & ~negative)
        n_tabu_pruned = int(cand.shape[0])
        if aspiration and cand.shape[0]:
            # delta >= -gain, so only edges whose gain could reach the
            # best-so-far are worth an exact evaluation
            maybe = cand[ac - gains[cand[:, 0]] < best_ac_so_far]
            for vi, oi in maybe:
                delta = swap_components(state, int(vacant[vi]), int(occ[oi])).delta
                if ac + delta < best_ac_so_far:
                    keep[vi, oi] = True
                    n_tabu_pruned -= 1

    pairs = np.argwhere(keep)  # row-major over (vacant, occ): lexicographic
    edges = np.stack([vacant[pairs[:, 0]], occ[pairs[:, 1]]], axis=1).astype(np.int64)
    return WiringResult(
        edges=edges,
        gain=gain_full,
        loss=loss_full,
        full_edge_count=int(vacant.shape[0] * occ.shape[0]),
        nb_pruned=int(negative.sum()),
        tabu_pruned=n_tabu_pruned,
    )


def step(
    state: AssignmentState,
    edge: Sequence[int],
    tabu: TabuList,
    t: int,
) -> tuple[AssignmentState, float]:
    """Apply one swap; reward is the access cost reduction."""
    insert, remove = int(edge[0]), int(edge[1])
    new_state = apply_swap(state, insert, remove)
    tabu.add(insert, t)
    tabu.add(remove, t)
    return new_state, state.ac - new_state.ac


class GreedyDeltaSelector:
    """Picks the wired edge with the smallest exact delta (first on ties)."""

    def choose(self, ctx: StepContext, rng: np.random.Generator) -> int:
        deltas = edge_deltas(ctx.state, ctx.edges)
        return int(np.argmin(deltas))


class RandomSelector:
    def choose(self, ctx: StepContext, rng: np.random.Generator) -> int:
        return int(rng.integers(ctx.edges.shape[0]))


def _p1_candidates(state: AssignmentState, tabu: TabuList, t: int) -> StepContext:
    """Single-facility fallback: the decomposition is undefined, so expose
    every non-tabu edge with exact gains computed by full evaluation."""
    instance = state.instance
    mask = np.ones(instance.n, dtype=bool)
    mask[state.facilities] = False
    vacant = np.nonzero(mask)[0]
    r = int(state.facilities[0])
    keep_v = ~tabu.mask(vacant, t)
    if tabu.is_tabu(r, t):
        keep_v &= False
    vacant = vacant[keep_v]
    h = instance.demands[state.ftype]
    gain_full = np.zeros(instance.n)
    if vacant.shape[0]:
        dv = instance.columns(vacant)
        gain_full[vacant] = np.maximum(0.0, state.d1[:, None] - dv).T @ h
    edges = np.stack([vacant, np.full_like(vacant, r)], axis=1)
    return StepContext(
        state=state,
        edges=edges,
        gain=gain_full,
        loss=np.zeros(instance.n),
        step_index=t,
        full_edge_count=int(instance.n - 1),
    )


def _fallback_edge(
    state: AssignmentState,
    tabu: TabuList,
    t: int,
    pinned: frozenset[int],
) -> tuple[int, int] | None:
    """Best strictly improving swap, preferring non-tabu edges; None only
    when no single swap reduces the access cost."""
    vacant, occ, deltas = all_swap_deltas(state)
    if pinned:
        allowed = ~np.isin(occ, list(pinned))
        occ = occ[allowed]
        deltas = deltas[:, allowed]
    if occ.shape[0] == 0 or vacant.shape[0] == 0:
        return None
    tabu_v = tabu.mask(vacant, t)
    tabu_o = tabu.mask(occ, t)
    banned = tabu_v[:, None] | tabu_o[None, :]
    for scan in (~banned, banned):
        masked = np.where(scan, deltas, np.inf)
        flat = int(np.argmin(masked))
        vi, oi = divmod(flat, occ.shape[0])
        if masked[vi, oi] < -IMPROVE_EPS:
            return int(vacant[vi]), int(occ[oi])
    return None


def run_episode(
    instance: ProblemInstance,
    ftype: str,
    p: int,
    selector: EdgeSelector,
    config: EpisodeConfig,
    init: Iterable[int] | None = None,
    pinned: Iterable[int] = (),
) -> Solution:
    """Drive swaps from a greedy start for at most max_steps steps.

    Stops early only at a certified local optimum: the wired candidate
    list came back empty and an exhaustive scan found no improving swap.
    Returns the best state visited.
    """
    t0 = time.perf_counter()
    pinned = frozenset(int(v) for v in pinned)
    facs = greedy_init(instance, ftype, p, pinned) if init is None else np.asarray(
        sorted(set(int(v) for v in init)), dtype=np.int64
    )
    if init is not None and facs.shape[0] != p:
        raise ValueError(f"init has {facs.shape[0]} facilities, budget is {p}")
    state = build_assignment(instance, ftype, facs)
    rng = np.random.default_rng(config.seed)
    tabu = TabuList(config.tabu_tenure)
    best_facs, best_ac = state.facilities.copy(), state.ac
    steps: list[StepRecord] = []
    trace = [state.ac]
    wired_counts: list[int] = []
    full_counts: list[int] = []
    local_opt = False

    for t in range(config.max_steps):
        if state.p >= 2:
            wr = wire(state, tabu, t, best_ac, config.aspiration, pinned)
            ctx = StepContext(
                state=state,
                edges=wr.edges,
                gain=wr.gain,
                loss=wr.loss,
                step_index=t,
                full_edge_count=wr.full_edge_count,
                nb_pruned=wr.nb_pruned,
                tabu_pruned=wr.tabu_pruned,
            )
        else:
            ctx = _p1_candidates(state, tabu, t)
        full_counts.append(ctx.full_edge_count)

        if ctx.edges.shape[0] == 0:
            if not config.fallback_scan:
                break
            edge = _fallback_edge(state, tabu, t, pinned)
            if edge is None:
                local_opt = True
                break
            wired_counts.append(ctx.full_edge_count)  # fallback scanned all
        else:
            wired_counts.append(int(ctx.edges.shape[0]))
            idx = selector.choose(ctx, rng)
            edge = (int(ctx.edges[idx, 0]), int(ctx.edges[idx, 1]))

        state, reward = step(state, edge, tabu, t)
        observe = getattr(selector, "observe", None)
        if observe is not None:
            observe(reward, state)
        steps.append(StepRecord(insert=edge[0], remove=edge[1], delta=-reward))
        trace.append(state.ac)
        if state.ac < best_ac:
            best_ac = state.ac
            best_facs = state.facilities.copy()

    return Solution(
        ftype=ftype,
        facilities=[int(f) for f in best_facs],
        ac=float(best_ac),
        steps=steps,
        ac_trace=trace,
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
        wired_edges_per_step=wired_counts,
        full_edges_per_step=full_counts,
        local_optimum=local_opt,
        final_facilities=[int(f) for f in state.facilities],
    )
