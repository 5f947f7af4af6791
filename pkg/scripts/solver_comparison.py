#!/usr/bin/env python3
"""Active-set vs discretized convex-program comparison data.

Writes comparison.csv (per-outcome wages from both solvers plus the
stability mask) and summary.json into --out. Defaults to the tight-noise
Gaussian-log instance on the 201x200 grid, where both objectives agree
to a fraction of a percent while the tabulated wages show the tail
instability of the grid program.
"""

import argparse
import json
import sys
import tempfile

from mhsolver.cli import main as cli_main

DEFAULT_CONFIG = {
    "distribution": {"family": "gaussian", "sigma": 10.0},
    "utility": {"family": "log", "w0": 50.0},
    "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
    "a0": 100.0,
    "action_interval": [0.0, 300.0],
    "reservation_utility": 4.5,
    "grids": {"n_outcome": 201, "n_action": 200},
}


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/comparison")
    ap.add_argument("--config", default=None)
    ap.add_argument("--grid-ny", type=int, default=None)
    ap.add_argument("--grid-na", type=int, default=None)
    args = ap.parse_args(argv)

    if args.config is None:
        cfg = dict(DEFAULT_CONFIG)
    else:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    cli_args = ["--config", cfg_path, "--out", args.out,
                "--command", "compare-solvers"]
    if args.grid_ny is not None:
        cli_args += ["--grid-ny", str(args.grid_ny)]
    if args.grid_na is not None:
        cli_args += ["--grid-na", str(args.grid_na)]
    return cli_main(cli_args)


if __name__ == "__main__":
    sys.exit(run())
