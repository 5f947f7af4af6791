#!/usr/bin/env python3
"""Wage frontier and validity sweep over reservation utilities.

Writes frontier.csv and sweep.csv into --out for the standard
Gaussian-log instance (or a custom config). The sweep rows carry the
per-point validity flag, best deviation and zero-pay probability that
drive the transition plot.
"""

import argparse
import json
import sys
import tempfile

import numpy as np

from mhsolver.cli import main as cli_main

DEFAULT_CONFIG = {
    "distribution": {"family": "gaussian", "sigma": 50.0},
    "utility": {"family": "log", "w0": 50.0},
    "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
    "a0": 100.0,
    "action_interval": [0.0, 300.0],
}


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/frontier")
    ap.add_argument("--config", default=None)
    ap.add_argument("--u-min", type=float, default=2.0)
    ap.add_argument("--u-max", type=float, default=5.5)
    ap.add_argument("--n-points", type=int, default=40)
    args = ap.parse_args(argv)

    if args.config is None:
        cfg = dict(DEFAULT_CONFIG)
    else:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    cfg["reservation_utility"] = [
        float(u) for u in np.linspace(args.u_min, args.u_max, args.n_points)]

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    code = cli_main(["--config", cfg_path, "--out", args.out,
                     "--command", "pareto"])
    if code != 0:
        return code
    return cli_main(["--config", cfg_path, "--out", args.out,
                     "--command", "sweep"])


if __name__ == "__main__":
    sys.exit(run())
