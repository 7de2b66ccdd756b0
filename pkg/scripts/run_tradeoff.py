#!/usr/bin/env python3
"""Sweep the harvested-energy requirement on the bundled scenario and write
the rate-energy tradeoff curve as CSV plus a JSON ledger."""
import argparse
import pathlib
import sys

from rs_swipt.cli import main as cli_main

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/tradeoff_theta80.json")
    parser.add_argument("--seeds", type=int, default=4)
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()
    root = pathlib.Path(__file__).resolve().parents[1]
    outdir = root / args.outdir
    outdir.mkdir(exist_ok=True)
    name = pathlib.Path(args.config).stem
    status = 0
    for fmt in ("csv", "json"):
        rc = cli_main(
            [
                "tradeoff",
                "--config",
                str(root / args.config),
                "--seeds",
                str(args.seeds),
                "--format",
                fmt,
                "--out",
                str(outdir / f"{name}.{fmt}"),
                "--quiet",
            ]
        )
        status = max(status, rc)
    print(f"tradeoff curve written to {outdir}/{name}.csv (exit {status})")
    sys.exit(status)
