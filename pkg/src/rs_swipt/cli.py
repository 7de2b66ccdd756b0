"""Command-line interface.

    rs-swipt tradeoff --config scenario.json [--out curve.csv]
    rs-swipt region   --config scenario.json [--format json]
    rs-swipt point    --config scenario.json [--eth 35]

Exit codes: 0 full success, 2 when any grid point was infeasible, 1 on error.
Powers inside scenario files accept dBm or watt suffixes; --eth is in
microwatts to match the usual tradeoff-axis unit.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .algorithms import AlgorithmConfig
from .scenario import load_scenario
from .sweeps import (
    SweepSpec,
    default_energy_grid,
    emit,
    format_power_table,
    paper_weight_grid,
    run_point,
    run_region_sweep,
    run_tradeoff_sweep,
)
from .types import StrategyKind

_STRATEGY_CHOICES = {
    "rs": (StrategyKind.RS,),
    "mulp": (StrategyKind.MULP,),
    "scsic": (StrategyKind.SCSIC,),
    "all": (StrategyKind.RS, StrategyKind.MULP, StrategyKind.SCSIC),
}


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument(
        "--strategy",
        choices=sorted(_STRATEGY_CHOICES),
        default="all",
        help="which transmission strategies to run",
    )
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument(
        "--seeds", type=int, default=None, help="number of random starts per point"
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rs-swipt",
        description=(
            "Precoder optimization for multi-antenna SWIPT broadcast channels: "
            "weighted-sum-rate maximization under a harvested-energy constraint."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, description in (
        ("tradeoff", "sweep the harvested-energy requirement"),
        ("region", "sweep the second receiver's rate weight"),
        ("point", "solve a single operating point and print the power table"),
    ):
        p = sub.add_parser(name, help=description)
        _add_common_options(p)
        if name == "point":
            p.add_argument(
                "--eth",
                type=float,
                default=None,
                help="override the energy threshold, in microwatts",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.config)
        config = scenario.config
        algorithm = AlgorithmConfig()
        if args.seeds is not None:
            algorithm = replace(algorithm, num_random_starts=max(0, args.seeds))
        strategies = _STRATEGY_CHOICES[args.strategy]

        if args.command == "point" and args.eth is not None:
            config = replace(config, energy_threshold=args.eth * 1e-6)

        spec = SweepSpec(
            kind=args.command,
            config=config,
            channels=scenario.channels,
            strategies=strategies,
            energy_grid=scenario.energy_grid or default_energy_grid(),
            weight_grid=scenario.weight_grid or paper_weight_grid(),
            algorithm=algorithm,
        )
        if args.command == "tradeoff":
            result = run_tradeoff_sweep(spec)
        elif args.command == "region":
            result = run_region_sweep(spec)
        else:
            result = run_point(spec)

        if not args.quiet and args.command == "point":
            print(format_power_table(result))
        if args.out is not None:
            emit(result, args.format, args.out)
            if not args.quiet:
                print(f"wrote {len(result.rows)} rows to {args.out}")
        elif args.command != "point" and not args.quiet:
            for row in result.rows:
                wsr = f"{row.point.wsr:.4f}" if row.point else "-"
                print(f"{row.coordinate:.6g}\t{row.strategy}\t{row.status}\t{wsr}")
        return 2 if result.any_infeasible else 0
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
