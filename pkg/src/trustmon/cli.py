"""Command line entry point.

    trustmon execute  --tool <t> --phase <analyze|infer> --config <file> --workdir <dir>
    trustmon evaluate --kind <effectiveness|efficiency> --workdir <dir> [--tool <t>]
    trustmon detail   --benchmark <manifest> [--model <file>]

Exit codes: 0 success, 2 configuration error, 3 detector error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    DatasetError,
    DetectorError,
    MissingOutputs,
    ModelFileError,
    TrustmonError,
)
from .harness import (
    TOOLS,
    describe_benchmark,
    evaluate,
    execute,
    load_run_config,
)
from .metrics import render_report

EXIT_CONFIG = 2
EXIT_DETECTOR = 3
EXIT_IO = 4


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DetectorError):
        return EXIT_DETECTOR
    if isinstance(exc, (ModelFileError, DatasetError, MissingOutputs, OSError)):
        return EXIT_IO
    if isinstance(exc, TrustmonError):
        return EXIT_DETECTOR
    raise exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustmon",
        description="Run and evaluate misclassification detectors on a benchmark.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_exec = sub.add_parser("execute", help="run a detector phase")
    p_exec.add_argument("--tool", choices=TOOLS, required=True)
    p_exec.add_argument("--phase", choices=("analyze", "infer"), required=True)
    p_exec.add_argument("--config", required=True, help="run-config JSON file")
    p_exec.add_argument("--workdir", required=True)
    p_exec.add_argument(
        "--command",
        default=None,
        help="delegate the phase to an external tool process (plug-in mode); "
        "the command gets --phase/--benchmark/--model/--workdir appended",
    )

    p_eval = sub.add_parser("evaluate", help="measure effectiveness or efficiency")
    p_eval.add_argument("--kind", choices=("effectiveness", "efficiency"), required=True)
    p_eval.add_argument("--workdir", required=True)
    p_eval.add_argument("--tool", choices=TOOLS, default=None)
    p_eval.add_argument(
        "--uncertain-abstain",
        action="store_true",
        help="exclude uncertain notifications from the confusion matrix "
        "instead of counting them as alarms",
    )

    p_detail = sub.add_parser("detail", help="print dataset / model summary tables")
    p_detail.add_argument("--benchmark", required=True, help="benchmark manifest")
    p_detail.add_argument("--model", default=None, help="optional model file")

    return parser


def _cmd_execute(args) -> int:
    config = load_run_config(args.config, tool=args.tool, workdir=args.workdir)
    command = args.command.split() if args.command else None
    record = execute(config, args.phase, subprocess_command=command)
    mem = (
        f"{record.peak_rss_mib:.2f} MiB"
        if record.peak_rss_mib is not None
        else "unavailable"
    )
    print(
        f"{config.tool} {args.phase}: done in {record.duration_s:.3f} s, "
        f"peak RSS {mem}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    if args.kind == "effectiveness":
        from .harness import evaluate_effectiveness

        if args.tool:
            tools = [args.tool]
        else:
            tools = [
                t
                for t in TOOLS
                if (Path(args.workdir) / t / "notifications.csv").exists()
            ]
        if not tools:
            raise MissingOutputs(f"no notifications.csv found under {args.workdir}")
        for tool in tools:
            report = evaluate_effectiveness(
                args.workdir, tool, uncertain_as_alarm=not args.uncertain_abstain
            )
            print(f"== {tool} ==")
            print(render_report(report))
        return 0
    table = evaluate("efficiency", args.workdir)
    print(
        f"{'Tool':<12} {'Benchmark':<12} {'Phase':<8} {'Runs':>5} "
        f"{'Duration':>10} {'Memory':>11}"
    )
    for row in table:
        mem = f"{row['peak_rss_mib']:.2f}" if row["peak_rss_mib"] is not None else "n/a"
        print(
            f"{row['tool']:<12} {row['benchmark']:<12} {row['phase']:<8} "
            f"{row['runs']:>5} {row['mean_duration_s']:>10.3f} {mem:>11}"
        )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "execute":
            return _cmd_execute(args)
        if args.subcommand == "evaluate":
            return _cmd_evaluate(args)
        print(describe_benchmark(args.benchmark, args.model))
        return 0
    except TrustmonError as exc:
        code = _exit_code(exc)
        category = {EXIT_CONFIG: "config", EXIT_DETECTOR: "detector", EXIT_IO: "io"}[code]
        print(f"error[{category}]: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
