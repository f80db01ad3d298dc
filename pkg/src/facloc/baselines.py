"""Reference solvers: exhaustive search, swap descent, tabu search,
variable neighborhood search, a genetic algorithm, and LP-file export."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .assignment import (
    AssignmentState,
    all_swap_deltas,
    apply_swap,
    build_assignment,
)
from .instances import ProblemInstance
from .swap_search import IMPROVE_EPS, TabuList, greedy_init

BRUTE_FORCE_LIMIT = 10_000_000
LP_EXPORT_LIMIT = 2000


@dataclass
class SolverReport:
    method: str
    facilities: list[int]
    ac: float
    wall_time_ms: float
    iterations: int
    evaluations: int = 0
    extra: dict = field(default_factory=dict)


def _report(method, state: AssignmentState, t0, iterations, evaluations=0, **extra):
    return SolverReport(
        method=method,
        facilities=[int(f) for f in state.facilities],
        ac=float(state.ac),
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
        iterations=iterations,
        evaluations=evaluations,
        extra=dict(extra),
    )


def brute_force(instance: ProblemInstance, ftype: str, p: int) -> SolverReport:
    """Global optimum by enumeration; ties resolve to the set that
    enumerates first, i.e. the lexicographically smallest one."""
    t0 = time.perf_counter()
    n = instance.n
    if comb(n, p) > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"C({n},{p}) = {comb(n, p)} exceeds the enumeration limit {BRUTE_FORCE_LIMIT}"
        )
    h = instance.demands[ftype]
    dmat = instance.columns(np.arange(n))
    best_ac = np.inf
    best = None
    count = 0
    for subset in combinations(range(n), p):
        ac = float(np.dot(h, dmat[:, list(subset)].min(axis=1)))
        count += 1
        if ac < best_ac:
            best_ac = ac
            best = subset
    state = build_assignment(instance, ftype, best)
    return _report("bf", state, t0, iterations=count, evaluations=count)


def local_search(
    instance: ProblemInstance, ftype: str, p: int, init=None
) -> SolverReport:
    """Best-improvement swap descent; stops at a one-swap local optimum."""
    t0 = time.perf_counter()
    facs = greedy_init(instance, ftype, p) if init is None else init
    state = build_assignment(instance, ftype, facs)
    iterations = 0
    evaluations = 0
    while True:
        vacant, occ, deltas = all_swap_deltas(state)
        evaluations += deltas.size
        if deltas.size == 0:
            break
        flat = int(np.argmin(deltas))
        vi, oi = divmod(flat, occ.shape[0])
        if deltas[vi, oi] >= -IMPROVE_EPS:
            break
        state = apply_swap(state, int(vacant[vi]), int(occ[oi]))
        iterations += 1
    return _report("ls", state, t0, iterations, evaluations)


def tabu_search(
    instance: ProblemInstance,
    ftype: str,
    p: int,
    init=None,
    iterations: int = 100,
    tenure: int = 7,
) -> SolverReport:
    """Best admissible move each round, worsening allowed; keeps the best
    state visited. Aspiration admits tabu moves that beat it."""
    t0 = time.perf_counter()
    facs = greedy_init(instance, ftype, p) if init is None else init
    state = build_assignment(instance, ftype, facs)
    best_state = state.copy()
    tabu = TabuList(tenure)
    evaluations = 0
    done = 0
    for t in range(iterations):
        vacant, occ, deltas = all_swap_deltas(state)
        evaluations += deltas.size
        if deltas.size == 0:
            break
        banned = tabu.mask(vacant, t)[:, None] | tabu.mask(occ, t)[None, :]
        admissible = ~banned | (state.ac + deltas < best_state.ac)
        masked = np.where(admissible, deltas, np.inf)
        flat = int(np.argmin(masked))
        vi, oi = divmod(flat, occ.shape[0])
        if not np.isfinite(masked[vi, oi]):
            break  # everything tabu and nothing aspirational
        insert, remove = int(vacant[vi]), int(occ[oi])
        state = apply_swap(state, insert, remove)
        tabu.add(insert, t)
        tabu.add(remove, t)
        done = t + 1
        if state.ac < best_state.ac:
            best_state = state.copy()
    return _report("ts", best_state, t0, done, evaluations)


def _random_swap(state: AssignmentState, rng: np.random.Generator) -> AssignmentState:
    mask = np.ones(state.instance.n, dtype=bool)
    mask[state.facilities] = False
    vacant = np.nonzero(mask)[0]
    if vacant.shape[0] == 0:
        return state
    insert = int(rng.choice(vacant))
    remove = int(rng.choice(state.facilities))
    return apply_swap(state, insert, remove)


def vns(
    instance: ProblemInstance,
    ftype: str,
    p: int,
    init=None,
    k_max: int = 3,
    iterations: int = 20,
    seed: int = 0,
) -> SolverReport:
    """Shake with k random swaps, descend, accept improvements; k grows on
    failure and wraps at k_max. k_max = 0 reduces to plain descent."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    base = local_search(instance, ftype, p, init)
    best = build_assignment(instance, ftype, base.facilities)
    evaluations = base.evaluations
    if k_max > 0:
        k = 1
        for _ in range(iterations):
            shaken = best
            for _ in range(k):
                shaken = _random_swap(shaken, rng)
            descended = local_search(instance, ftype, p, shaken.facilities)
            evaluations += descended.evaluations
            if descended.ac < best.ac - IMPROVE_EPS:
                best = build_assignment(instance, ftype, descended.facilities)
                k = 1
            else:
                k = k + 1 if k < k_max else 1
    return _report("vns", best, t0, iterations if k_max > 0 else 0, evaluations)


def genetic(
    instance: ProblemInstance,
    ftype: str,
    p: int,
    population: int = 32,
    generations: int = 50,
    seed: int = 0,
) -> SolverReport:
    """Facility-set GA: tournament parents, uniform set crossover repaired
    to exactly p nodes, one random-swap mutation per child, elitism of 1."""
    if population < 2:
        raise ValueError("population must be at least 2")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = instance.n
    h = instance.demands[ftype]

    def ac_of(members: np.ndarray) -> float:
        return float(np.dot(h, instance.columns(members).min(axis=1)))

    pop = [np.sort(rng.choice(n, size=p, replace=False)) for _ in range(population)]
    fitness = [ac_of(ind) for ind in pop]
    evaluations = population

    def tournament() -> np.ndarray:
        a, b = rng.integers(population), rng.integers(population)
        return pop[a] if fitness[a] <= fitness[b] else pop[b]

    for _ in range(generations):
        elite_idx = int(np.argmin(fitness))
        children = [pop[elite_idx].copy()]
        while len(children) < population:
            pa, pb = tournament(), tournament()
            core = np.intersect1d(pa, pb)
            fringe = np.setdiff1d(np.union1d(pa, pb), core)
            need = p - core.shape[0]
            child = core if need == 0 else np.sort(
                np.concatenate([core, rng.choice(fringe, size=need, replace=False)])
            )
            # mutation: move one member to a random vacant node
            out = int(rng.choice(child))
            vacant = np.setdiff1d(np.arange(n), child)
            if vacant.shape[0]:
                child = np.sort(np.append(child[child != out], int(rng.choice(vacant))))
            children.append(child)
        pop = children
        fitness = [ac_of(ind) for ind in pop]
        evaluations += population
    best_idx = int(np.argmin(fitness))
    state = build_assignment(instance, ftype, pop[best_idx])
    return _report("ga", state, t0, generations, evaluations)


def export_mip_lp(instance: ProblemInstance, ftype: str, p: int, path) -> None:
    """Write the assignment MIP in CPLEX LP text format.

    Variables: x_j (open facility at j), y_i_j (region i served by j).
    Constraints: each region served once (n), linking y to x (n^2), and
    exactly p open facilities (1).
    """
    n = instance.n
    if n > LP_EXPORT_LIMIT:
        raise ValueError(f"LP export limited to n <= {LP_EXPORT_LIMIT}, got {n}")
    h = instance.demands[ftype]
    dmat = instance.columns(np.arange(n))
    lines = ["Minimize"]
    terms = []
    for i in range(n):
        for j in range(n):
            c = float(h[i] * dmat[i, j])
            if c != 0.0:
                terms.append(f"{c!r} y_{i}_{j}")
    lines.append(" obj: " + (" + ".join(terms) if terms else "0 x_0"))
    lines.append("Subject To")
    for i in range(n):
        lhs = " + ".join(f"y_{i}_{j}" for j in range(n))
        lines.append(f" assign_{i}: {lhs} = 1")
    for i in range(n):
        for j in range(n):
            lines.append(f" link_{i}_{j}: y_{i}_{j} - x_{j} <= 0")
    count = " + ".join(f"x_{j}" for j in range(n))
    lines.append(f" open: {count} = {p}")
    lines.append("Binary")
    names = [f"x_{j}" for j in range(n)]
    names += [f"y_{i}_{j}" for i in range(n) for j in range(n)]
    for start in range(0, len(names), 8):
        lines.append(" " + " ".join(names[start : start + 8]))
    lines.append("End")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))
        f.write("\n")
