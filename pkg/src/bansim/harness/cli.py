"""Command line entry point: ``bansim <experiment> --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..equalize import DivergenceError
from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import run_experiment
from .svg import emit_svg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bansim",
        description="Body-area-network PHY/link simulation experiments",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="scenario config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"bansim: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text, args.experiment)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.output_dir = args.out
        os.makedirs(cfg.output_dir, exist_ok=True)
        outputs = run_experiment(cfg)
    except ConfigError as exc:
        print(f"bansim: config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"bansim: {exc}", file=sys.stderr)
        return 3
    for stem, table, plot in outputs:
        csv_path = os.path.join(cfg.output_dir, f"{stem}.csv")
        table.write_csv(csv_path)
        print(csv_path)
        if plot is not None:
            svg_path = os.path.join(cfg.output_dir, f"{stem}.svg")
            with open(svg_path, "w", newline="\n") as fh:
                fh.write(emit_svg(table, plot))
            print(svg_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
