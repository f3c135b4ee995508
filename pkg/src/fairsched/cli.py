"""Command line entry point.

    fairsched run   --synthetic SPEC | --workload PATH  --orgs K --machines M ...
    fairsched sweep --seeds 0-9 --policies rand,direct,rr ...
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

from .errors import CapacityError, ConfigError, ContractViolation, DomainError, SWFParseError
from .experiment import (
    AGGREGATE_COLUMNS,
    POLICY_NAMES,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    run_experiment,
    run_sweep,
    trace_rows,
    write_csv,
)


def _int_list(text: str) -> list[int]:
    """``"0,3,7"`` or ``"0-9"`` or a mix of both."""
    out = []
    for part in filter(None, text.split(",")):
        lo, sep, hi = part.partition("-")
        try:
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--workload", metavar="PATH", help="SWF trace file")
    src.add_argument("--synthetic", metavar="SPEC",
                     help="COUNT:R0-R1:P0-P1 per organization, ';'-separated (one group is replicated)")
    p.add_argument("--orgs", type=int, required=True, metavar="K")
    p.add_argument("--machines", type=int, required=True, metavar="M")
    p.add_argument("--machine-dist", default="uniform", metavar="uniform|zipf:THETA")
    p.add_argument("--release-scale", type=float, default=1.0, metavar="F")
    p.add_argument("--rand-n", type=int, metavar="N", help="sampled orderings for rand (overrides epsilon/lambda)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--lambda", dest="lam", type=float, default=0.95)
    p.add_argument("--t-end", type=int, required=True, metavar="T")
    p.add_argument("--out", default="-", metavar="PATH", help="summary CSV (default: stdout)")
    p.add_argument("--timing", action="store_true", help="append the policy wall time (not reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairsched", description="Fair scheduling experiments for shared clusters.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one policy on one instance, compared with the exact fair schedule")
    _add_common(run)
    run.add_argument("--policy", choices=POLICY_NAMES, default="rr")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trace", metavar="PATH", help="per-step utilities and contributions CSV")
    run.add_argument("--segment-start", type=int, metavar="T0")
    run.add_argument("--segment-length", type=int, metavar="L")

    sweep = sub.add_parser("sweep", help="mean and stddev of unfairness over seeds and segments")
    _add_common(sweep)
    sweep.add_argument("--policies", default="rand,direct,rr",
                       help="comma-separated policy names (default: rand,direct,rr)")
    sweep.add_argument("--seeds", type=_int_list, default=[0], metavar="LIST")
    sweep.add_argument("--segments", type=int, metavar="S", help="number of consecutive trace segments")
    sweep.add_argument("--segment-length", type=int, metavar="L")
    sweep.add_argument("--cells", metavar="PATH", help="also write one row per (seed, segment, policy)")
    return parser


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _config(args, policy: str = "rr", seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(
        orgs=args.orgs, machines=args.machines, t_end=args.t_end,
        workload=args.workload, synthetic=args.synthetic,
        machine_dist=args.machine_dist, release_scale=args.release_scale,
        policy=policy, rand_n=args.rand_n, epsilon=args.epsilon, lam=args.lam, seed=seed,
        segment_start=getattr(args, "segment_start", None),
        segment_length=getattr(args, "segment_length", None),
    )


def _cmd_run(args) -> None:
    report = run_experiment(_config(args, args.policy, args.seed), trace=bool(args.trace))
    cols = SUMMARY_COLUMNS + (["wall_time"] if args.timing else [])
    row = report.row()
    row["wall_time"] = report.wall_time
    with _output(args.out) as fh:
        write_csv(fh, cols, [row])
    if args.trace:
        tcols, trows = trace_rows(report.run)
        with _output(args.trace) as fh:
            write_csv(fh, tcols, trows)


def _cmd_sweep(args) -> None:
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if args.segments is not None:
        if args.workload is None or args.segment_length is None:
            raise ConfigError("--segments needs --workload and --segment-length")
        segments = [i * args.segment_length for i in range(args.segments)]
    else:
        segments = [None]
    aggregate, reports = run_sweep(_config(args), args.seeds, policies, segments)
    if args.timing:
        for row, policy in zip(aggregate, policies):
            row["wall_time"] = sum(r.wall_time for r in reports if r.config.policy == policy)
    cols = AGGREGATE_COLUMNS + (["wall_time"] if args.timing else [])
    with _output(args.out) as fh:
        write_csv(fh, cols, aggregate)
    if args.cells:
        with _output(args.cells) as fh:
            write_csv(fh, SUMMARY_COLUMNS, [r.row() for r in reports])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            _cmd_run(args)
        else:
            _cmd_sweep(args)
    except (ConfigError, SWFParseError, CapacityError, DomainError) as exc:
        print(f"fairsched: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ContractViolation) as exc:
        print(f"fairsched: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
