"""Command-line entry point.

    beamsim <converge|pep|bler|overhead> --config <file-or-preset>
            --seed <u64> --out <dir> [--full-scale] [--workers N]

``--config`` accepts a JSON file path or a built-in preset name (see
``beamsim --list-presets``).  Exit codes: 0 success, 1 configuration error,
2 infeasible-scheme abort.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .exceptions import ConfigError, SchemeInfeasibleError
from .experiments import EXPERIMENTS, load_config, run_experiment
from .presets import PRESETS, get_preset, preset_names


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamsim",
        description="Beamforming-scheme simulation experiments",
    )
    parser.add_argument(
        "--list-presets", action="store_true", help="list built-in preset names and exit"
    )
    sub = parser.add_subparsers(dest="experiment")
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=f"run a {name} experiment")
        cmd.add_argument("--config", required=True, help="config JSON path or preset name")
        cmd.add_argument("--seed", required=True, type=int, help="master seed (required)")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument(
            "--full-scale",
            action="store_true",
            help="use the paper-scale sample counts instead of desk scale",
        )
        cmd.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    return parser


def _resolve_config(spec: str):
    if spec in PRESETS and not Path(spec).exists():
        return load_config(get_preset(spec))
    if not Path(spec).exists():
        raise ConfigError(
            f"config {spec!r} is neither a file nor a preset; presets: {preset_names()}"
        )
    return load_config(spec)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        for name in preset_names():
            print(name)
        return 0
    if args.experiment is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        config = _resolve_config(args.config)
        if config.experiment != args.experiment:
            raise ConfigError(
                f"config is a {config.experiment!r} experiment, "
                f"but the {args.experiment!r} subcommand was invoked"
            )
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        manifest = run_experiment(
            config,
            args.seed,
            args.out,
            full_scale=args.full_scale,
            workers=max(1, args.workers),
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SchemeInfeasibleError as exc:
        print(f"infeasible scheme: {exc}", file=sys.stderr)
        return 2
    for name in manifest.outputs:
        print(f"wrote {Path(args.out) / name}")
    print(f"wrote {Path(args.out) / 'manifest.json'}")
    return 0


def run() -> None:  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    run()
