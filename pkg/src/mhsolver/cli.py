"""Command-line front end: JSON config in, JSON/CSV artifacts out.

Commands
  solve            full cost minimization (active set + fallback)
  relaxed          IR + local-IC relaxed problem only
  sweep            validity report per reservation utility
  pareto           minimal-wage frontier over reservation utilities
  validate         solve relaxed, then certify the first-order approach
  compare-solvers  active-set vs discretized convex program
  bench            repeated timed solves with percentile summary

All artifacts are written atomically (temp file + rename). CSV headers
are frozen and carry unit labels; money columns are in thousands of
dollars, utility columns in utils. Errors exit nonzero after printing a
machine-readable JSON object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import active_set, grid, validator
from .errors import MHSolverError, ParseError, ValidationError
from .problem import ProblemSpec, problem_from_dict
from .relaxed import pareto_frontier, solve_relaxed

__all__ = ["main", "parse_config", "run_command"]

# Frozen CSV headers (golden-file contract; do not reorder).
CONTRACT_HEADER = ["y [thousands of dollars]", "wage [thousands of dollars]",
                   "utility [utils]"]
ACTION_HEADER = ["action", "agent_utility [utils]"]
SWEEP_HEADER = ["reservation_utility [utils]", "valid", "best_action",
                "max_gain [utils]", "zero_pay_prob"]
FRONTIER_HEADER = ["reservation_utility [utils]", "feasible",
                   "expected_wage [thousands of dollars]", "lambda", "mu",
                   "ir_binding"]
COMPARISON_HEADER = ["y [thousands of dollars]", "density",
                     "wage_active [thousands of dollars]",
                     "wage_grid [thousands of dollars]", "stable"]


def parse_config(path: str) -> ProblemSpec:
    """Read, parse and validate a JSON problem config."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    return problem_from_dict(cfg)


def _atomic_write(path: str, writer) -> None:
    """Write via a temp file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    _atomic_write(path, lambda fh: (json.dump(obj, fh, indent=2),
                                    fh.write("\n")))


def write_csv(path: str, header, rows) -> None:
    def writer(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x
                        for x in row])
    _atomic_write(path, writer)


def _contract_rows(problem, contract):
    cache = active_set.build_cache(problem)
    y = cache.y
    wage = np.asarray(contract.wage_at(y), dtype=float)
    util = np.asarray(contract.utility_at(y), dtype=float)
    return [[float(a), float(b), float(c)] for a, b, c in zip(y, wage, util)]


def _action_rows(problem, contract, n=None):
    if n is None:
        n = problem.grids.n_action
    cache = active_set.build_cache(problem)
    v = np.asarray(contract.utility_at(cache.y), dtype=float)
    dom = problem.action_domain
    actions = np.linspace(dom.lo, dom.hi, n)
    return [[float(a), float(cache.agent_utility(v, a))] for a in actions]


def _cmd_solve(problem, out, args):
    res = active_set.solve(problem, warm=args.seed)
    write_json(os.path.join(out, "result.json"), res.to_dict())
    write_csv(os.path.join(out, "contract.csv"), CONTRACT_HEADER,
              _contract_rows(problem, res.contract))
    write_csv(os.path.join(out, "action_curve.csv"), ACTION_HEADER,
              _action_rows(problem, res.contract))
    return {"expected_wage": res.expected_wage,
            "provenance": res.provenance.value}


def _cmd_relaxed(problem, out, args):
    sol = solve_relaxed(problem, warm=args.seed)
    payload = sol.to_dict()
    if sol.mu_star > 0:
        rep = sol.contract.threshold_report()
        payload["threshold"] = {
            "threshold_score": rep.threshold_score,
            "threshold_outcome": rep.threshold_outcome,
            "zero_pay_prob": rep.zero_pay_prob,
        }
    write_json(os.path.join(out, "result.json"), payload)
    write_csv(os.path.join(out, "contract.csv"), CONTRACT_HEADER,
              _contract_rows(problem, sol.contract))
    write_csv(os.path.join(out, "action_curve.csv"), ACTION_HEADER,
              _action_rows(problem, sol.contract))
    return {"expected_wage": sol.expected_wage}


def _sweep_grid(problem):
    if problem.reservation_utility_grid:
        return list(problem.reservation_utility_grid)
    return [problem.reservation_utility]


def _cmd_sweep(problem, out, args):
    cache = active_set.build_cache(problem)
    rows = []
    warm = None
    for u_bar in _sweep_grid(problem):
        sub = problem.with_reservation_utility(u_bar)
        sol = solve_relaxed(sub, warm=warm)
        warm = (sol.lambda_star, sol.mu_star)
        rep = validator.validate_foa(sol.contract, sub, cache=cache)
        rows.append([float(u_bar), int(rep.valid), rep.best_action,
                     rep.max_gain, rep.zero_pay_prob])
    rows.sort(key=lambda r: r[0])
    write_csv(os.path.join(out, "sweep.csv"), SWEEP_HEADER, rows)
    return {"n_points": len(rows), "n_valid": sum(r[1] for r in rows)}


def _cmd_pareto(problem, out, args):
    points = pareto_frontier(problem, _sweep_grid(problem))
    rows = [[p.reservation_utility, int(p.feasible), p.expected_wage,
             p.lambda_star, p.mu_star, int(p.ir_binding)] for p in points]
    write_csv(os.path.join(out, "frontier.csv"), FRONTIER_HEADER, rows)
    return {"n_points": len(rows),
            "n_feasible": sum(int(p.feasible) for p in points)}


def _cmd_validate(problem, out, args):
    sol = solve_relaxed(problem, warm=args.seed)
    rep = validator.validate_foa(sol.contract, problem)
    payload = {"relaxed": sol.to_dict(), "foa_report": rep.to_dict()}
    write_json(os.path.join(out, "report.json"), payload)
    return {"valid": rep.valid, "max_gain": rep.max_gain}


def _cmd_compare(problem, out, args):
    cmp = grid.compare_solvers(problem, args.grid_ny, args.grid_na)
    rows = [[float(y), float(f), float(wa), float(wg), int(s)]
            for y, f, wa, wg, s in zip(cmp.y_grid, cmp.density,
                                       cmp.wage_active, cmp.wage_grid,
                                       cmp.stable)]
    write_csv(os.path.join(out, "comparison.csv"), COMPARISON_HEADER, rows)
    write_json(os.path.join(out, "summary.json"), cmp.to_summary())
    return {"objective_gap_rel": cmp.objective_gap_rel}


def _cmd_bench(problem, out, args):
    repeats = max(args.repeats, 20)
    runs = []
    for _ in range(repeats):
        res = active_set.solve(problem, warm=args.seed)
        runs.append({"wall_time_ms": res.wall_time * 1e3,
                     "provenance": res.provenance.value,
                     "iterations": res.iterations})
    times = np.array([r["wall_time_ms"] for r in runs])
    payload = {
        "repeats": repeats,
        "median_ms": float(np.median(times)),
        "p10_ms": float(np.percentile(times, 10)),
        "p90_ms": float(np.percentile(times, 90)),
        "runs": runs,
    }
    write_json(os.path.join(out, "timing.json"), payload)
    return {"median_ms": payload["median_ms"]}


_COMMANDS = {
    "solve": _cmd_solve,
    "relaxed": _cmd_relaxed,
    "sweep": _cmd_sweep,
    "pareto": _cmd_pareto,
    "validate": _cmd_validate,
    "compare-solvers": _cmd_compare,
    "bench": _cmd_bench,
}


def run_command(command: str, problem: ProblemSpec, out_dir: str, args) -> dict:
    if command not in _COMMANDS:
        raise ValidationError(f"unknown command {command!r}")
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    summary = _COMMANDS[command](problem, out_dir, args)
    summary["command"] = command
    summary["elapsed_s"] = time.perf_counter() - t0
    return summary


def _build_parser():
    p = argparse.ArgumentParser(
        prog="mhsolve",
        description="Optimal contracts under moral hazard with limited "
                    "liability: relaxed and globally incentive-compatible "
                    "cost minimization.",
        epilog="Config defaults: tolerances {abs_int: 1e-10, rel_int: 1e-10, "
               "root_tol: 1e-9, grad_tol: 1e-8, deviation_tol: 1e-6, "
               "kkt_tol: 1e-6}; grids {n_outcome: 401, n_action: 200}; "
               "reservation_utility may be a number or a sorted sweep list.")
    p.add_argument("--config", required=True, help="JSON problem config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--command", required=True, choices=sorted(_COMMANDS))
    p.add_argument("--seed-multipliers", default=None, metavar="LAM,MU",
                   help="warm-start multipliers, e.g. '130,2100'")
    p.add_argument("--grid-ny", type=int, default=None,
                   help="outcome grid size for compare-solvers")
    p.add_argument("--grid-na", type=int, default=None,
                   help="action grid size for compare-solvers")
    p.add_argument("--repeats", type=int, default=20,
                   help="bench repetitions (min 20)")
    return p


def _parse_seed(text):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(
            "--seed-multipliers expects 'lambda,mu' with two numbers")
    try:
        lam, mu = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ValidationError(f"bad --seed-multipliers value: {exc}") from exc
    if lam < 0:
        raise ValidationError("warm-start lambda must be nonnegative")
    return lam, mu


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        args.seed = _parse_seed(args.seed_multipliers)
        problem = parse_config(args.config)
        summary = run_command(args.command, problem, args.out, args)
    except MHSolverError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 1
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
