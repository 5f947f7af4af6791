#!/usr/bin/env python3
"""Timed repeated solves with a percentile summary.

Writes timing.json (median, p10, p90 and per-run rows) into --out for
the standard Gaussian-log instance or a custom config.
"""

import argparse
import json
import sys
import tempfile

from mhsolver.cli import main as cli_main

DEFAULT_CONFIG = {
    "distribution": {"family": "gaussian", "sigma": 50.0},
    "utility": {"family": "log", "w0": 50.0},
    "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
    "a0": 100.0,
    "action_interval": [0.0, 300.0],
    "reservation_utility": 4.5,
}


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/bench")
    ap.add_argument("--config", default=None)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args(argv)

    if args.config is None:
        cfg = dict(DEFAULT_CONFIG)
    else:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    return cli_main(["--config", cfg_path, "--out", args.out,
                     "--command", "bench", "--repeats", str(args.repeats)])


if __name__ == "__main__":
    sys.exit(run())
