"""Command-line entry point: run, trace and sweep experiments from configs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiment import (
    build_experiment_config,
    parse_config_text,
    run_experiment,
    trace_command,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="override scenario.seed")
    parser.add_argument("--out", default=None, help="override the output path")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftwin",
        description="Adaptive window-selection experiments on drifting streams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run all trials and write the CSV report")
    _add_common(run_p)

    trace_p = sub.add_parser("trace", help="print one trial's selection trace")
    _add_common(trace_p)
    trace_p.add_argument("--trial", type=int, default=0, help="trial id to trace")

    sweep_p = sub.add_parser("sweep", help="run the experiment across parameter values")
    _add_common(sweep_p)
    sweep_p.add_argument("--param", required=True, help="config key to vary")
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    return parser


def _sweep_path(base: str, param: str, value: str) -> str:
    path = Path(base)
    return str(path.with_name(f"{path.stem}.{param}-{value}{path.suffix}"))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        fields = parse_config_text(Path(args.config).read_text(encoding="utf-8"))

        if args.command == "run":
            config = build_experiment_config(fields, args.seed, args.out)
            rows = run_experiment(config, quiet=args.quiet)
            if not args.quiet:
                failed = sum(1 for r in rows if r.stop_reason == "error")
                print(f"wrote {config.output_path} ({len(rows)} trials, {failed} failed)")
        elif args.command == "trace":
            config = build_experiment_config(fields, args.seed, args.out)
            if not 0 <= args.trial < config.trials:
                raise ValueError(f"trial must lie in [0, {config.trials - 1}]")
            print(trace_command(config, args.trial))
        else:  # sweep
            base_config = build_experiment_config(fields, args.seed, args.out)
            for value in args.values.split(","):
                value = value.strip()
                swept = dict(fields)
                swept[args.param] = value
                out = _sweep_path(base_config.output_path, args.param, value)
                config = build_experiment_config(swept, args.seed, out)
                run_experiment(config, quiet=args.quiet)
                if not args.quiet:
                    print(f"wrote {out}")
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
