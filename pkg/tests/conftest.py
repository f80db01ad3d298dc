"""Shared fixtures and independent oracles.

The oracles below recompute access costs with plain python/math so the
engine under test never checks itself.
"""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from facloc.instances import ProblemInstance, generate_synthetic


def oracle_ac(instance: ProblemInstance, ftype: str, facilities) -> float:
    """Access cost by direct summation; euclidean instances only."""
    assert instance.metric == "euclidean"
    h = instance.demands[ftype]
    pos = instance.positions
    total = 0.0
    for u in range(instance.n):
        best = min(
            math.hypot(pos[u, 0] - pos[f, 0], pos[u, 1] - pos[f, 1]) for f in facilities
        )
        total += float(h[u]) * best
    return total


def oracle_best_set(instance: ProblemInstance, ftype: str, p: int):
    """Exhaustive optimum (lexicographically first on ties)."""
    best_ac, best = math.inf, None
    for subset in combinations(range(instance.n), p):
        ac = oracle_ac(instance, ftype, subset)
        if ac < best_ac - 0.0:
            if ac < best_ac:
                best_ac, best = ac, subset
    return list(best), best_ac


def oracle_top2(instance: ProblemInstance, facilities):
    """Closest / second-closest per region under the (distance, id) order."""
    pos = instance.positions
    out = []
    for u in range(instance.n):
        ranked = sorted(
            (math.hypot(pos[u, 0] - pos[f, 0], pos[u, 1] - pos[f, 1]), f)
            for f in facilities
        )
        first = ranked[0]
        second = ranked[1] if len(ranked) > 1 else (math.inf, -1)
        out.append((first[1], first[0], second[1], second[0]))
    return out


LINE_DEMANDS = [1.0, 2.0, 3.0, 4.0]


def make_line(demands=None, budgets=None) -> ProblemInstance:
    h = list(LINE_DEMANDS if demands is None else demands)
    n = len(h)
    pos = np.stack([np.arange(n, dtype=float), np.zeros(n)], axis=1)
    return ProblemInstance(
        positions=pos,
        metric="euclidean",
        demands={"a": h},
        budgets=budgets or {"a": 1},
    )


def make_two_type_line(h_a=None, h_b=None, budgets=None) -> ProblemInstance:
    ha = list(LINE_DEMANDS if h_a is None else h_a)
    hb = list(LINE_DEMANDS if h_b is None else h_b)
    n = len(ha)
    pos = np.stack([np.arange(n, dtype=float), np.zeros(n)], axis=1)
    return ProblemInstance(
        positions=pos,
        metric="euclidean",
        demands={"a": ha, "b": hb},
        budgets=budgets or {"a": 1, "b": 1},
    )


@pytest.fixture
def line():
    return make_line()


@pytest.fixture
def two_type_line():
    return make_two_type_line()


def random_instance(n: int, p: int, seed: int) -> ProblemInstance:
    return generate_synthetic(n, {"a": p}, seed)


def random_state_facilities(n: int, p: int, rng: np.random.Generator) -> list[int]:
    return sorted(int(v) for v in rng.choice(n, size=p, replace=False))
