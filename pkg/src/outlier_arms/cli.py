"""Command-line entry points: run, label, bound, sweep, generate.

Configuration can come from a flat key=value file via --config; any value
given on the command line overrides the file.  All commands exit 0 on
success and nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds, env as env_mod, harness, oracle
from .core import Params
from .env import SyntheticSpec


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONVERTERS = {
    "epsilon": float, "rho": float, "delta": float, "k": float,
    "noise_width": float, "trials": int, "seed": int, "instance_seed": int,
    "n": int, "outlier_count": int, "max_pulls": int,
    "algorithm": str, "type": str, "means_file": str, "out": str,
    "graph_dump": str, "mode": str,
    "early_exit": lambda v: v.lower() in ("1", "true", "yes"),
}


def _apply_config_file(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    file_values = _parse_config_file(args.config)
    for key, raw in file_values.items():
        if key not in _CONVERTERS:
            raise ValueError(f"unknown config key {key!r}")
        if key in args._cli_given:  # command line wins
            continue
        setattr(args, key, _CONVERTERS[key](raw))


_FLAG_DEST_ALIASES = {"full_scan": "mode", "incremental": "mode"}


class _TrackingParser(argparse.ArgumentParser):
    """Remembers which dests were set explicitly on the command line."""

    def parse_args(self, argv=None, namespace=None):  # type: ignore[override]
        ns = super().parse_args(argv, namespace)
        given = set()
        for token in list(argv if argv is not None else sys.argv[1:]):
            if token.startswith("--"):
                dest = token[2:].split("=", 1)[0].replace("-", "_")
                given.add(_FLAG_DEST_ALIASES.get(dest, dest))
        ns._cli_given = given
        return ns


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=2.5, help="distance-ratio slack")
    p.add_argument("--rho", type=float, default=0.9, help="assumed normal-arm proportion")
    p.add_argument("--delta", type=float, default=0.1, help="failure probability budget")


def _add_instance(p: argparse.ArgumentParser) -> None:
    p.add_argument("--means-file", dest="means_file", default=None,
                   help="arm_id,mean file; otherwise a synthetic instance is generated")
    p.add_argument("--n", type=int, default=20, help="synthetic instance size")
    p.add_argument("--type", dest="type", default=env_mod.UPPER_SIDE,
                   choices=[env_mod.UPPER_SIDE, env_mod.INTERMEDIATE])
    p.add_argument("--outlier-count", dest="outlier_count", type=int, default=None)
    p.add_argument("--instance-seed", dest="instance_seed", type=int, default=1)


def _build_parser() -> _TrackingParser:
    parser = _TrackingParser(prog="outlier-arms",
                             description="Outlier-arm detection in multi-armed bandits")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded trials of one algorithm on one instance")
    run.add_argument("--config", default=None, help="flat key=value configuration file")
    _add_common(run)
    _add_instance(run)
    run.add_argument("--algorithm", default=harness.GOLD, choices=harness.ALGORITHMS)
    run.add_argument("--trials", type=int, default=10)
    run.add_argument("--seed", type=int, default=0, help="base seed; trial t uses seed+t")
    run.add_argument("--k", type=float, default=2.0, help="k-sigma multiplier (baseline)")
    run.add_argument("--max-pulls", dest="max_pulls", type=int, default=None)
    run.add_argument("--out", default=None, help="directory for trials.jsonl and summary.csv")
    run.add_argument("--graph-dump", dest="graph_dump", default=None,
                     help="write a per-pull graph activity log to this file")
    scan = run.add_mutually_exclusive_group()
    scan.add_argument("--incremental", dest="mode", action="store_const",
                      const="incremental", default="incremental",
                      help="prune only edges at the pulled arm (default)")
    scan.add_argument("--full-scan", dest="mode", action="store_const", const="full",
                      help="rescan every edge after each pull")
    run.add_argument("--early-exit", dest="early_exit", action="store_true",
                     help="check the stopping rule per pull instead of per sweep")

    label = sub.add_parser("label", help="certify outlier groups from a means file")
    label.add_argument("--means-file", dest="means_file", required=True)
    _add_common(label)

    bound = sub.add_parser("bound", help="print the analytic pull-count bounds")
    _add_common(bound)
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--reward-range", dest="reward_range", type=float, default=1.0)
    bound.add_argument("--min-gap", dest="min_gap", type=float, required=True)
    bound.add_argument("--literal-gap-power", dest="literal", action="store_true",
                       help="evaluate the termination bound with the unsquared gap")

    sweep = sub.add_parser("sweep", help="run a grid of synthetic cells to a CSV table")
    _add_common(sweep)
    sweep.add_argument("--ns", default="20,50,100", help="comma-separated instance sizes")
    sweep.add_argument("--epsilons", default="2.5,5", help="comma-separated epsilon values")
    sweep.add_argument("--types", default=f"{env_mod.UPPER_SIDE},{env_mod.INTERMEDIATE}")
    sweep.add_argument("--algorithms", default=",".join(harness.ALGORITHMS))
    sweep.add_argument("--trials", type=int, default=10)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--max-pulls", dest="max_pulls", type=int, default=None)
    sweep.add_argument("--instance-seed", dest="instance_seed", type=int, default=1)
    sweep.add_argument("--out", required=True, help="CSV output path")

    gen = sub.add_parser("generate", help="emit a synthetic arm-means file")
    _add_common(gen)
    _add_instance(gen)
    gen.add_argument("--seed", type=int, default=1, help="generation seed")
    gen.add_argument("--out", required=True, help="means file to write")
    return parser


def _make_spec(args) -> SyntheticSpec:
    return SyntheticSpec(
        n=args.n,
        epsilon=args.epsilon,
        rho=args.rho,
        outlier_type=args.type,
        outlier_count=args.outlier_count,
        seed=args.instance_seed,
    )


def _cmd_run(args) -> int:
    params = Params(epsilon=args.epsilon, rho=args.rho, delta=args.delta)
    instance = args.means_file if args.means_file else _make_spec(args)
    config = harness.ExperimentConfig(
        params=params,
        instance=instance,
        algorithm=args.algorithm,
        trials=args.trials,
        base_seed=args.seed,
        max_pulls=args.max_pulls,
        k=args.k,
        mode=args.mode,
        early_exit=args.early_exit,
        graph_dump=args.graph_dump,
    )
    summary, results, _ = harness.run_experiment(config)
    print(f"algorithm={args.algorithm} trials={summary.trials}")
    print(f"correctness={summary.correctness:.3f} precision={summary.precision:.3f} "
          f"recall={summary.recall:.3f} f1={summary.f1:.3f}")
    print(f"mean_pulls={summary.mean_pulls:.1f} stddev_pulls={summary.stddev_pulls:.1f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        harness.write_trials(out / "trials.jsonl", results)
        harness.write_summary(out / "summary.csv", summary)
        print(f"wrote {out / 'trials.jsonl'} and {out / 'summary.csv'}")
    return 0


def _cmd_label(args) -> int:
    params = Params(epsilon=args.epsilon, rho=args.rho, delta=args.delta)
    arm_set = env_mod.load_means(args.means_file, params.reward_model)
    verdicts = oracle.label_all(arm_set, params)
    if not verdicts:
        print("no certified groups")
        return 0
    for v in verdicts:
        members = ",".join(str(a) for a in sorted(v.group))
        print(
            f"group=[{members}] upper={len(v.upper_set)} lower={len(v.lower_set)} "
            f"gap_above={v.gap_above:.6g} gap_below={v.gap_below:.6g} "
            f"max_local_gap={v.max_local_gap:.6g} margin={v.margin(params.epsilon):.6g}"
        )
    return 0


def _cmd_bound(args) -> int:
    from .core import Bounded

    model = Bounded(0.0, args.reward_range) if args.reward_range != 1.0 else None
    params = (
        Params(epsilon=args.epsilon, rho=args.rho, delta=args.delta, reward_model=model)
        if model is not None
        else Params(epsilon=args.epsilon, rho=args.rho, delta=args.delta)
    )
    b = bounds.coefficient_b(args.epsilon)
    dp1 = bounds.delta_prime_value(args.delta, args.n, 1)
    report = bounds.pull_count_bounds(args.min_gap, params, args.n)
    total = bounds.total_pull_bound(args.min_gap, params, args.n,
                                    literal_gap_power=args.literal)
    print(f"b={b:.6f}")
    print(f"delta_prime(T=1)={dp1:.6g}")
    print(f"pair_coefficients upper={report.upper_coef:.6g} lower={report.lower_coef:.6g}")
    print(f"pair_pull_bounds lower={report.lower:.6g} upper={report.upper:.6g}")
    print(f"termination_coefficient={report.upper_coef:.6g}")
    print(f"termination_pull_bound={total:.6g}")
    return 0


def _cmd_sweep(args) -> int:
    rows = harness.sweep_grid(
        ns=[int(x) for x in args.ns.split(",") if x],
        epsilons=[float(x) for x in args.epsilons.split(",") if x],
        outlier_types=[x.strip() for x in args.types.split(",") if x],
        algorithms=[x.strip() for x in args.algorithms.split(",") if x],
        rho=args.rho,
        delta=args.delta,
        trials=args.trials,
        base_seed=args.seed,
        max_pulls=args.max_pulls,
        instance_seed=args.instance_seed,
    )
    harness.write_sweep(args.out, rows)
    failures = [r for r in rows if r["error"]]
    print(f"wrote {len(rows)} rows to {args.out} ({len(failures)} cell errors)")
    return 0


def _cmd_generate(args) -> int:
    spec = SyntheticSpec(
        n=args.n,
        epsilon=args.epsilon,
        rho=args.rho,
        outlier_type=args.type,
        outlier_count=args.outlier_count,
        seed=args.seed,
    )
    arm_set = env_mod.generate(spec)
    group = env_mod.planted_group(spec)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# synthetic instance n={args.n} epsilon={args.epsilon} "
                 f"rho={args.rho} type={args.type} seed={args.seed}\n")
        fh.write(f"# planted outlier ids: {','.join(str(a) for a in sorted(group))}\n")
        for i, mean in enumerate(arm_set.true_means):
            fh.write(f"{i},{mean!r}\n")
    print(f"wrote {args.n} arms to {args.out}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "label": _cmd_label,
    "bound": _cmd_bound,
    "sweep": _cmd_sweep,
    "generate": _cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            _apply_config_file(args)
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
