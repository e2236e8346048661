"""Command line entry point: ``fogmatch run | demo-counterexample | verify``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from fogmatch.matching import QuotaVector, audit, deferred_acceptance, multi_stage_da
from fogmatch.oracle import run_suite
from fogmatch.simulator import ConfigError, ExperimentConfig, export_csv, run_experiment, summarize

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


def _load_config(path: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    results = run_experiment(cfg, policies=args.policy, seeds=args.seed, jobs=args.jobs)
    try:
        export_csv(results, args.out, n_fogs=cfg.fog_count, timing=args.timing)
        if args.trace_stages:
            trace_path = Path(args.out).with_suffix(".stages.jsonl")
            with open(trace_path, "w") as fh:
                for r in results:
                    for t in r.traces:
                        rec = {"policy": r.policy, "user_count": r.user_count, "seed": r.seed, **t.to_dict()}
                        fh.write(json.dumps(rec) + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"{'policy':<12} {'users':>6} {'mean delay (s)':>15} {'delta_p (s)':>14} {'violations':>10}")
    for (policy, n), row in summarize(results).items():
        print(f"{policy:<12} {n:>6} {row['mean_delay']:>15.6g} {row['delta_p']:>14.6g} {row['violations']:>10.2f}")
    failed = [r for r in results if r.error]
    for r in failed:
        print(f"run failed: {r.policy} users={r.user_count} seed={r.seed}: {r.error}", file=sys.stderr)
    print(f"wrote {len(results)} rows to {args.out}")
    return EXIT_INFEASIBLE if failed else EXIT_OK


def cmd_demo(args) -> int:
    prefs = ((0, 1, 2),) * 3
    gl = (0, 1, 2)
    quotas = QuotaVector.uniform(3, 1, 2)
    print("3 users, 3 fogs, q_min=1, q_max=2, GL u1 > u2 > u3, every user prefers f1 > f2 > f3\n")

    da = deferred_acceptance(range(3), prefs, gl, quotas.q_max)
    print("classic DA with maximum quotas:")
    for f in range(3):
        print(f"  mu(f{f + 1}) = {{{', '.join(f'u{u + 1}' for u in da.users_at(f))}}}")
    print(audit(da, quotas, prefs, gl))

    m, traces = multi_stage_da(prefs, gl, quotas)
    print("\nmulti-stage DA:")
    for t in traces:
        print(
            f"  stage {t.index}: reserved {[f'u{u + 1}' for u in t.reserved]}, "
            f"DA on {[f'u{u + 1}' for u in t.subgroup]} with {t.capacity_source} quotas {list(t.capacities)}"
        )
        print(f"    q_min {list(t.q_min_before)} -> {list(t.q_min_after)}, q_max {list(t.q_max_before)} -> {list(t.q_max_after)}")
    for f in range(3):
        print(f"  mu(f{f + 1}) = {{{', '.join(f'u{u + 1}' for u in m.users_at(f))}}}")
    print(audit(m, quotas, prefs, gl, traces))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    checks = run_suite(cfg.verify_instances, cfg.seeds[0], cfg.verify_max_users, cfg.verify_max_fogs)
    for c in checks:
        print(c)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fogmatch", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep policies over seeded scenarios and write a CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--trace-stages", action="store_true", help="also write MSDA stage traces as JSON lines")
    run.add_argument("--policy", action="append", help="restrict to this policy (repeatable)")
    run.add_argument("--seed", action="append", type=int, help="restrict to this seed (repeatable)")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--timing", action="store_true", help="fill runtime_ms (output no longer reproducible)")
    run.set_defaults(func=cmd_run)

    demo = sub.add_parser("demo-counterexample", help="show plain DA breaking a minimum quota, and MSDA fixing it")
    demo.set_defaults(func=cmd_demo)

    ver = sub.add_parser("verify", help="brute-force oracle checks on small random instances")
    ver.add_argument("--config", required=True)
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
