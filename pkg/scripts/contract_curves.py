#!/usr/bin/env python3
"""Emit the contract and action-utility curves for one instance.

Writes result.json, contract.csv (y, wage, utility) and action_curve.csv
(a, U) into --out, for the standard Gaussian-log instance by default or
any JSON config passed with --config.
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
    ap.add_argument("--out", default="out/contract")
    ap.add_argument("--config", default=None,
                    help="JSON problem config (default: Gaussian-log instance)")
    ap.add_argument("--reservation-utility", type=float, default=None)
    ap.add_argument("--relaxed-only", action="store_true",
                    help="skip the global solve and emit the relaxed contract")
    args = ap.parse_args(argv)

    if args.config is None:
        cfg = dict(DEFAULT_CONFIG)
    else:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    if args.reservation_utility is not None:
        cfg["reservation_utility"] = args.reservation_utility

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    command = "relaxed" if args.relaxed_only else "solve"
    return cli_main(["--config", cfg_path, "--out", args.out,
                     "--command", command])


if __name__ == "__main__":
    sys.exit(run())
