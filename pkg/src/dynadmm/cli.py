"""Command-line front end for the experiment harness.

    dynadmm <sharing|lasso|bounds> [--config PATH] [--seed N] [--trials N]
            [--steps N] [--rho R[,R...]] [--jobs N] [--plot] [--out DIR]

Values resolve as defaults, then config file, then flags.  Exit codes:
0 success, 2 configuration problem, 3 oracle failure, 4 audited margin
below the tolerance (bounds runs).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .exceptions import ConfigError, ConvergenceError
from .experiments import build_config, load_config_file, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_MARGIN = 4

_SUBCOMMANDS = (
    ("sharing", "trial-averaged tracking error of the l1-priced sharing stream"),
    ("lasso", "tracking, ground-truth gaps, and sparsity of the moving-target lasso"),
    ("bounds", "per-step inequality audits on the smooth quadratic family"),
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynadmm",
        description="Run seeded tracking experiments and write CSV curves.",
    )
    subparsers = parser.add_subparsers(dest="experiment", required=True)
    for name, help_text in _SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", default=None, help="flat key=value config file")
        sub.add_argument("--seed", type=int, default=None, help="base seed; trial t uses seed+t")
        sub.add_argument("--trials", type=int, default=None, help="number of independent trials")
        sub.add_argument("--steps", type=int, default=None, help="time steps per trial")
        sub.add_argument(
            "--rho",
            default=None,
            help="penalty value, or a comma-separated sweep (one output file per value)",
        )
        sub.add_argument("--jobs", type=int, default=1, help="concurrent trial workers")
        sub.add_argument("--plot", action="store_true", help="also render SVG line charts")
        sub.add_argument("--out", default=None, help="output directory (default: cwd)")
    return parser


def _rho_override(text: str) -> dict:
    try:
        values = tuple(float(piece) for piece in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse --rho {text!r}: {exc}") from exc
    if len(values) == 1:
        return {"rho": values[0]}
    return {"rho_sweep": values}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be at least 1, got {args.jobs}")
        file_values = load_config_file(args.config) if args.config else None
        overrides = {
            "seed": args.seed,
            "trials": args.trials,
            "steps": args.steps,
            "output_dir": args.out,
        }
        if args.rho is not None:
            overrides.update(_rho_override(args.rho))
        cfg = build_config(args.experiment, file_values, overrides)
        artifacts = run_experiment(cfg, jobs=args.jobs)
        rendered = []
        if args.plot:
            from .plots import plot_artifacts

            rendered = plot_artifacts(artifacts.paths)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    for path in list(artifacts.paths) + list(rendered):
        print(path)
    if artifacts.violations:
        first = artifacts.violations[0]
        print(
            f"margin violation: {len(artifacts.violations)} audited "
            f"inequalities fell below the tolerance; first at trial "
            f"{first.trial}, step {first.k} ({first.name} = {first.margin:.3e})",
            file=sys.stderr,
        )
        return EXIT_MARGIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
