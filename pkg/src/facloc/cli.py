"""Command-line entry points: gen, solve, train, bench, export-lp, serve.

Output files are byte-reproducible under fixed seeds; measured wall times
are written only when --timings is passed.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import baselines, bench
from .instances import generate_synthetic, load_instance, save_instance
from .mflp import mflp_brute_force, solve_mflp
from .policy import PolicySelector, init_params, load_checkpoint, save_checkpoint
from .swap_search import EpisodeConfig, GreedyDeltaSelector, Solution, run_episode
from .training import FamilySpec, train_config_from_json, train_policy


def _parse_types(text: str) -> dict[str, int]:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise argparse.ArgumentTypeError(
                f"expected TYPE=COUNT pairs separated by commas, got {text!r}"
            )
        k, v = part.split("=", 1)
        out[k.strip()] = int(v)
    return out


def _write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def _episode_selector(method: str, policy_path: str | None):
    if method == "greedy":
        return GreedyDeltaSelector()
    params = load_checkpoint(policy_path) if policy_path else init_params(seed=0)
    return PolicySelector(params, mode="greedy")


def cmd_gen(args) -> int:
    instance = generate_synthetic(
        args.n, _parse_types(args.types), args.seed, args.demand_model, args.metric
    )
    save_instance(instance, args.out)
    print(f"wrote {args.out}: n={instance.n} types={instance.budgets}")
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    if instance.n <= 2000:
        instance.precompute_distances()
    types = instance.types
    steps = args.steps

    if len(types) == 1:
        k = types[0]
        p = instance.budgets[k]
        k_steps = steps if steps is not None else 3 * p
        if args.method in bench.EPISODE_METHODS:
            selector = _episode_selector(args.method, args.policy)
            sol = run_episode(
                instance, k, p, selector, EpisodeConfig(max_steps=k_steps, seed=args.seed)
            )
            payload = sol.to_json_dict(include_timings=args.timings)
        else:
            rep = bench.solve_with(args.method, instance, k, p, args.seed, k_steps)
            payload = {
                "type_placements": {k: rep.facilities},
                "access_cost": rep.ac,
                "steps": [],
                "wall_time_ms": rep.wall_time_ms if args.timings else 0.0,
            }
        _write_json(payload, args.out)
        print(f"{args.method}: ac={payload['access_cost']:.6f}")
        return 0

    if args.method == "bf":
        sol = mflp_brute_force(instance)
    elif args.method in bench.EPISODE_METHODS:
        selector = _episode_selector(args.method, args.policy)
        max_p = max(instance.budgets.values())
        k_steps = steps if steps is not None else 3 * max_p
        sol = solve_mflp(
            instance, selector, EpisodeConfig(max_steps=k_steps, seed=args.seed)
        )
    else:
        # baseline stage one per type, then the shared conflict resolution
        stage_one = {}
        for k in types:
            p = instance.budgets[k]
            k_steps = steps if steps is not None else 3 * p
            rep = bench.solve_with(args.method, instance, k, p, args.seed, k_steps)
            stage_one[k] = Solution(
                ftype=k,
                facilities=rep.facilities,
                ac=rep.ac,
                steps=[],
                ac_trace=[rep.ac],
                wall_time_ms=rep.wall_time_ms,
                wired_edges_per_step=[],
                full_edges_per_step=[],
            )
        sol = solve_mflp(instance, GreedyDeltaSelector(), EpisodeConfig(max_steps=0),
                         stage_one_solutions=stage_one)
    _write_json(sol.to_json_dict(include_timings=args.timings), args.out)
    print(f"{args.method}: total ac={sol.total_ac:.6f}")
    return 0


def cmd_train(args) -> int:
    family = FamilySpec.from_json(args.family) if args.family else FamilySpec()
    config = train_config_from_json(args.config) if args.config else None
    if config is None:
        from .policy import TrainConfig

        config = TrainConfig()
    params, history = train_policy(family, config, log=print)
    save_checkpoint(params, args.out)
    final = history[-1] if history else {}
    print(f"wrote {args.out}: batches={len(history)} "
          f"final_return={final.get('mean_return', 0.0):+.4f}")
    return 0


def cmd_bench(args) -> int:
    spec = bench.GridSpec.from_json(args.grid) if args.grid else bench.GridSpec()
    results = bench.run_grid(spec, jobs=args.jobs)
    bench.report(results, args.format, args.out, include_timings=args.timings)
    for row in bench.wiring_table(results):
        print(
            f"{row['cell']} {row['method']}: wired/step "
            f"{row['mean_wired_per_step']:.1f} vs full {row['mean_full_per_step']:.1f} "
            f"({row['reduction_pct']:.1f}% filtered)"
        )
    print(f"wrote {args.out}")
    return 0


def cmd_export_lp(args) -> int:
    instance = load_instance(args.instance)
    ftype = args.type or instance.types[0]
    if ftype not in instance.budgets:
        raise SystemExit(f"unknown type {ftype!r}; instance has {instance.types}")
    baselines.export_mip_lp(instance, ftype, instance.budgets[ftype], args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(instances_dir=args.instances)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facloc", description="Swap-based facility location toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--types", required=True, help="TYPE=COUNT[,TYPE=COUNT...]")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--demand-model", choices=["uniform", "lognormal"], default="uniform")
    g.add_argument("--metric", choices=["euclidean", "haversine"], default="euclidean")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("--instance", required=True)
    s.add_argument("--method", choices=list(bench.KNOWN_METHODS), default="drl")
    s.add_argument("--steps", type=int, default=None, help="swap steps K (default 3p)")
    s.add_argument("--policy", default=None, help="checkpoint for method drl")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--timings", action="store_true", help="write measured wall times")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("train", help="train the edge-scoring policy")
    t.add_argument("--family", default=None, help="family spec JSON")
    t.add_argument("--config", default=None, help="training config JSON")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    b = sub.add_parser("bench", help="run a solver grid")
    b.add_argument("--grid", default=None, help="grid spec JSON (default desk grid)")
    b.add_argument("--out", required=True)
    b.add_argument("--format", choices=["csv", "markdown", "json"], default="csv")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--timings", action="store_true")
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("export-lp", help="write the assignment MIP as an LP file")
    e.add_argument("--instance", required=True)
    e.add_argument("--type", default=None)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export_lp)

    v = sub.add_parser("serve", help="run the planning HTTP service")
    v.add_argument("--port", type=int, default=8000)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--instances", default=None, help="directory of instance JSON files")
    v.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
