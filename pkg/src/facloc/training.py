"""Policy-gradient training over families of synthetic instances."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .instances import ProblemInstance, generate_synthetic
from .policy import (
    GraphContext,
    PolicyParams,
    PolicySelector,
    TrainConfig,
    Trajectory,
    init_params,
    reinforce_update,
)
from .swap_search import EpisodeConfig, run_episode


@dataclass
class FamilySpec:
    """Distribution of training instances: a list of (n, p) shapes cycled
    round-robin, each materialized from a deterministic seed."""

    cells: list[tuple[int, int]] = field(default_factory=lambda: [(15, 3), (20, 4)])
    demand_model: str = "uniform"
    seed_base: int = 0
    pool_size: int = 64  # distinct instances kept and cycled

    @classmethod
    def from_json(cls, path) -> "FamilySpec":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        return cls(
            cells=[tuple(c) for c in raw.get("cells", [(15, 3), (20, 4)])],
            demand_model=raw.get("demand_model", "uniform"),
            seed_base=raw.get("seed_base", 0),
            pool_size=raw.get("pool_size", 64),
        )


def build_pool(family: FamilySpec) -> list[tuple[ProblemInstance, int, GraphContext]]:
    """Materialize the instance pool with cached message-passing graphs."""
    pool = []
    for i in range(family.pool_size):
        n, p = family.cells[i % len(family.cells)]
        instance = generate_synthetic(
            n, {"a": p}, family.seed_base + i, family.demand_model
        )
        instance.precompute_distances()
        pool.append((instance, p, GraphContext.for_instance(instance)))
    return pool


def rollout(
    params: PolicyParams,
    instance: ProblemInstance,
    p: int,
    graph: GraphContext,
    max_steps: int,
    seed: int,
) -> Trajectory:
    """One sampled episode; empty wiring ends it (no exhaustive fallback),
    so every recorded step carries a policy log-probability."""
    selector = PolicySelector(params, mode="sample", record=True, graph=graph)
    sol = run_episode(
        instance,
        "a",
        p,
        selector,
        EpisodeConfig(max_steps=max_steps, seed=seed, fallback_scan=False),
    )
    return Trajectory(
        steps=selector.drain(), adjacency=graph.adjacency, initial_ac=sol.ac_trace[0]
    )


def train_policy(
    family: FamilySpec,
    config: TrainConfig,
    params: PolicyParams | None = None,
    log=None,
) -> tuple[PolicyParams, list[dict]]:
    """REINFORCE over the family; returns the trained params and per-batch
    stats. Runtime is bounded by batches * episodes_per_batch episodes."""
    if params is None:
        params = init_params(seed=config.seed)
    pool = build_pool(family)
    baseline = None
    history = []
    counter = 0
    t0 = time.perf_counter()
    for b in range(config.batches):
        batch = []
        for _ in range(config.episodes_per_batch):
            instance, p, graph = pool[counter % len(pool)]
            steps = config.max_steps if config.max_steps > 0 else 2 * p
            batch.append(
                rollout(params, instance, p, graph, steps, config.seed + counter)
            )
            counter += 1
        stats = reinforce_update(batch, params, config, baseline)
        baseline = stats["baseline"]
        stats["batch"] = b
        stats["elapsed_s"] = time.perf_counter() - t0
        history.append(stats)
        if log is not None and (b % 20 == 0 or b == config.batches - 1):
            log(
                f"batch {b:4d}  return {stats.get('mean_return', 0.0):+.4f}  "
                f"loss {stats['loss']:+.5f}  baseline {baseline:+.4f}"
            )
    return params, history


def train_config_from_json(path) -> TrainConfig:
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    return TrainConfig(
        learning_rate=raw.get("learning_rate", 1e-3),
        episodes_per_batch=raw.get("episodes_per_batch", 8),
        baseline_decay=raw.get("baseline_decay", 0.99),
        entropy_weight=raw.get("entropy_weight", 0.01),
        max_steps=raw.get("max_steps", 0),
        seed=raw.get("seed", 0),
        batches=raw.get("batches", 200),
    )
