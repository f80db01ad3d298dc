"""Race the solvers over the desk-scale grid and emit the result table
plus the wiring-reduction summary.

Usage: python scripts/run_benchmark.py --out results.csv [--small]
"""
import argparse

from facloc.bench import GridSpec, report, run_grid, wiring_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results.csv")
    ap.add_argument("--format", choices=["csv", "markdown", "json"], default="csv")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--policy", default=None, help="trained checkpoint for drl")
    ap.add_argument("--small", action="store_true",
                    help="enumerable cells only, with optimality gaps")
    args = ap.parse_args()

    if args.small:
        spec = GridSpec(
            cells=[(15, 3), (20, 4), (30, 5)],
            instances_per_cell=20,
            solvers=["bf", "ls", "ts", "vns", "ga", "greedy", "drl"],
            policy_path=args.policy,
        )
    else:
        spec = GridSpec(instances_per_cell=5, policy_path=args.policy)

    results = run_grid(spec, jobs=args.jobs)
    report(results, args.format, args.out, include_timings=True)
    print(f"wrote {args.out}")
    print(f"{'cell':<12}{'method':<9}{'mean_ac':>12}{'gap%':>9}{'rt_ms':>10}")
    for r in results:
        print(f"{r['cell']:<12}{r['method']:<9}{r['mean_ac']:>12.4f}"
              f"{r['gap_pct']:>9.3f}{r['mean_rt_ms']:>10.1f}")
    table = wiring_table(results)
    if table:
        print("\nwiring reduction (candidates scored vs full swap graph):")
        for t in table:
            print(f"  {t['cell']} {t['method']}: {t['mean_wired_per_step']:.0f} of "
                  f"{t['mean_full_per_step']:.0f} per step "
                  f"({t['reduction_pct']:.1f}% filtered)")


if __name__ == "__main__":
    main()
