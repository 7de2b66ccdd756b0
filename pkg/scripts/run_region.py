#!/usr/bin/env python3
"""Trace the two-receiver rate-region boundaries for the bundled scenarios
(similar channel strengths / near-orthogonal, and strength disparity /
smaller angle) by sweeping the second receiver's rate weight."""
import argparse
import pathlib
import sys

from rs_swipt.cli import main as cli_main

CONFIGS = ["configs/region_theta80.json", "configs/region_gamma03_theta60.json"]

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=2)
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()
    root = pathlib.Path(__file__).resolve().parents[1]
    outdir = root / args.outdir
    outdir.mkdir(exist_ok=True)
    status = 0
    for cfg in CONFIGS:
        name = pathlib.Path(cfg).stem
        rc = cli_main(
            [
                "region",
                "--config",
                str(root / cfg),
                "--seeds",
                str(args.seeds),
                "--out",
                str(outdir / f"{name}.csv"),
                "--quiet",
            ]
        )
        print(f"{name}: exit {rc}")
        status = max(status, rc)
    sys.exit(status)
