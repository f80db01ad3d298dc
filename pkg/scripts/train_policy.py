"""Train the edge-scoring policy on small synthetic cities and report the
optimality gap of greedy policy rollouts against exhaustive search.

Usage: python scripts/train_policy.py --batches 150 --out ckpt.json
"""
import argparse
import time

import numpy as np

from facloc.baselines import brute_force
from facloc.instances import generate_synthetic
from facloc.policy import PolicySelector, TrainConfig, save_checkpoint
from facloc.swap_search import EpisodeConfig, run_episode
from facloc.training import FamilySpec, train_policy


def evaluate(params, cells, count=100, seed_base=1000):
    gaps = []
    for i in range(count):
        n, p = cells[i % len(cells)]
        inst = generate_synthetic(n, {"a": p}, seed=seed_base + i)
        inst.precompute_distances()
        opt = brute_force(inst, "a", p).ac
        selector = PolicySelector(params, mode="greedy").bind(inst)
        sol = run_episode(inst, "a", p, selector, EpisodeConfig(max_steps=3 * p, seed=i))
        gaps.append((sol.ac - opt) / opt * 100)
    return float(np.mean(gaps)), float(np.max(gaps))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batches", type=int, default=150)
    ap.add_argument("--episodes-per-batch", type=int, default=8)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="ckpt.json")
    args = ap.parse_args()

    family = FamilySpec(cells=[(15, 3), (20, 4)], seed_base=0, pool_size=64)
    config = TrainConfig(
        learning_rate=args.lr,
        batches=args.batches,
        episodes_per_batch=args.episodes_per_batch,
        seed=args.seed,
    )
    t0 = time.time()
    params, history = train_policy(family, config, log=print)
    print(f"trained {len(history)} batches in {time.time() - t0:.1f}s")
    save_checkpoint(params, args.out)
    print(f"checkpoint written to {args.out}")

    mean_gap, max_gap = evaluate(params, family.cells)
    print(f"greedy policy rollouts vs optimum: mean gap {mean_gap:.3f}%, "
          f"max {max_gap:.2f}%")


if __name__ == "__main__":
    main()
