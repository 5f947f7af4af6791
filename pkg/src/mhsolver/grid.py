"""Discretized cost minimization as a convex program (global oracle).

Contract values are tabulated on an outcome grid and optimized directly:
the compensation-cost objective is convex in the tabulated utilities and
the IR / per-action global incentive constraints are linear, so an
interior-point solve returns an epsilon-KKT point of the discretized
problem. Density rows are renormalized to unit grid mass so the discrete
problem is a proper probability model (the single-action sanity case then
reproduces full insurance exactly).

Useful both as the fallback when active-set constraint generation stalls
and as an independent optimality oracle in tests; known to be unstable in
tails where f(y|a0) is tiny, which is reported via a stability mask, not
patched.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .errors import Infeasible, NoConvergence
from .preferences import CARAUtility, CRRAUtility, LogUtility
from .problem import ProblemSpec

__all__ = ["GridSolution", "solve_grid", "solve_grid_relaxed",
           "compare_solvers", "SolverComparison", "stability_mask"]

_STABILITY_THRESHOLD = 1e-8  # relative to max f(y|a0)
_BINDING_DUAL = 1e-7


@dataclass(frozen=True)
class GridSolution:
    y_grid: np.ndarray
    v_values: np.ndarray
    a_grid: np.ndarray
    expected_wage: float
    kkt_residual: float
    binding_actions: tuple
    binding_multipliers: tuple
    ir_dual: float
    ir_residual: float
    weights: np.ndarray
    f0: np.ndarray

    def wage_values(self, problem: ProblemSpec) -> np.ndarray:
        return np.asarray(problem.utility.k(np.maximum(self.v_values,
                                                       problem.utility.u0)))

    def stable(self) -> np.ndarray:
        return stability_mask(self.f0)


def stability_mask(f0: np.ndarray) -> np.ndarray:
    """True where the density is large enough for v to be pinned down."""
    return f0 >= _STABILITY_THRESHOLD * np.max(f0)


def _cost_objective(problem, v):
    """Sum of convex per-point compensation costs k(v_j), cvxpy form."""
    util = problem.utility
    if isinstance(util, LogUtility):
        return cp.exp(v) - util.w0
    if isinstance(util, CRRAUtility):
        g = util.gamma
        if g > 1.0:
            # k(v) = ((gamma-1)(-v))^{-1/(gamma-1)} - w0, convex on v < 0
            return cp.power(cp.multiply(g - 1.0, -v), -1.0 / (g - 1.0)) - util.w0
        return cp.power(cp.multiply(1.0 - g, v), 1.0 / (1.0 - g)) - util.w0
    if isinstance(util, CARAUtility):
        return -cp.log(-util.alpha * v) / util.alpha - util.w0
    raise NoConvergence(f"no convex objective form for utility {util.family!r}")


def _grid_rows(problem, n_y, actions):
    from .active_set import build_cache

    cache = build_cache(problem, n_y)
    y, w = cache.y, cache.w
    f0 = cache.f0 * w
    f0 = f0 / np.sum(f0)
    d = problem.distribution
    rows = np.empty((len(actions), y.size))
    for i, a in enumerate(actions):
        r = np.asarray(d.density(y, a), dtype=float) * w
        rows[i] = r / np.sum(r)
    return cache, f0, rows


def _action_grid(problem, n_a):
    dom = problem.action_domain
    grid = np.linspace(dom.lo, dom.hi, n_a)
    grid[np.argmin(np.abs(grid - problem.a0))] = problem.a0  # anchor a0 exactly
    return grid


def solve_grid(problem: ProblemSpec, n_y: int = None, n_a: int = None,
               a_grid=None) -> GridSolution:
    """epsilon-KKT point of the discretized cost minimization."""
    if n_y is None:
        n_y = problem.grids.n_outcome
    if n_a is None:
        n_a = problem.grids.n_action
    if n_y < 51:
        raise ValueError("n_y must be >= 51")
    if a_grid is None:
        if n_a < 20:
            raise ValueError("n_a must be >= 20")
        a_grid = _action_grid(problem, n_a)
    a_grid = np.asarray(a_grid, dtype=float)

    util = problem.utility
    cost = problem.cost
    a0 = problem.a0
    u_bar = problem.reservation_utility

    cache, f0, rows = _grid_rows(problem, n_y, a_grid)
    c0 = float(cost.cost(a0))
    v = cp.Variable(cache.y.size)

    ll = v >= util.u0
    ir = f0 @ v - c0 >= u_bar
    gic = []
    gic_actions = []
    gic_rows = []
    for a_hat, row in zip(a_grid, rows):
        if abs(a_hat - a0) <= 1e-12 * (1.0 + abs(a0)):
            continue  # vacuous at the intended action
        gic.append((f0 - row) @ v >= c0 - float(cost.cost(a_hat)))
        gic_actions.append(float(a_hat))
        gic_rows.append(f0 - row)

    objective = cp.Minimize(f0 @ _cost_objective(problem, v))
    prob = cp.Problem(objective, [ll, ir] + gic)
    try:
        # The accuracy warning is redundant: the epsilon-KKT check below is
        # the binding acceptance test for the returned point.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prob.solve(solver=cp.CLARABEL, tol_feas=1e-10,
                       tol_gap_abs=1e-10, tol_gap_rel=1e-10)
    except cp.error.SolverError as exc:
        raise NoConvergence(f"convex solver failed: {exc}") from exc
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise Infeasible(
            "discretized problem infeasible; constraint actions: "
            f"{gic_actions[:5]}{'...' if len(gic_actions) > 5 else ''}")
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise NoConvergence(f"convex solver status {prob.status}")

    vv = np.asarray(v.value, dtype=float)
    tol = problem.tolerances
    ir_res = float(f0 @ vv - c0 - u_bar)
    residuals = [max(-ir_res, 0.0), max(float(np.max(util.u0 - vv)), 0.0)]
    comp = [abs(float(ir.dual_value) * ir_res)]
    binding, multipliers = [], []
    for a_hat, row, con in zip(gic_actions, gic_rows, gic):
        r = float(row @ vv - (c0 - float(cost.cost(a_hat))))
        m = float(con.dual_value)
        residuals.append(max(-r, 0.0))
        comp.append(abs(m * r))
        if m > _BINDING_DUAL * (1.0 + abs(float(ir.dual_value))):
            binding.append(a_hat)
            multipliers.append(m)
    kkt = max(residuals + comp)
    if kkt > tol.kkt_tol:
        raise NoConvergence(f"KKT residual {kkt} above tolerance {tol.kkt_tol}")

    wage = np.asarray(util.k(np.maximum(vv, util.u0)))
    return GridSolution(
        y_grid=cache.y,
        v_values=vv,
        a_grid=a_grid,
        expected_wage=float(f0 @ wage),
        kkt_residual=float(kkt),
        binding_actions=tuple(binding),
        binding_multipliers=tuple(multipliers),
        ir_dual=float(ir.dual_value),
        ir_residual=ir_res,
        weights=cache.w,
        f0=cache.f0,
    )


def solve_grid_relaxed(problem: ProblemSpec, n_y: int = None):
    """Discretized relaxed problem (IR + local IC equality).

    Returns (GridSolution-like tuple, lambda, mu): the equality-constraint
    dual is an independent oracle for the canonical multipliers.
    """
    if n_y is None:
        n_y = problem.grids.n_outcome
    from .active_set import build_cache

    cache = build_cache(problem, n_y)
    util = problem.utility
    w = cache.w
    f0 = cache.f0 * w
    scale = np.sum(f0)
    f0 = f0 / scale
    fa0 = cache.fa0 * w / scale
    a0 = problem.a0

    v = cp.Variable(cache.y.size)
    ir = f0 @ v - float(problem.cost.cost(a0)) >= problem.reservation_utility
    lic = fa0 @ v == float(problem.cost.cost_d(a0))
    prob = cp.Problem(cp.Minimize(f0 @ _cost_objective(problem, v)),
                      [v >= util.u0, ir, lic])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prob.solve(solver=cp.CLARABEL, tol_feas=1e-10,
                       tol_gap_abs=1e-10, tol_gap_rel=1e-10)
    except cp.error.SolverError as exc:
        raise NoConvergence(f"convex solver failed: {exc}") from exc
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise Infeasible("discretized relaxed problem infeasible")
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise NoConvergence(f"convex solver status {prob.status}")
    vv = np.asarray(v.value, dtype=float)
    wage = np.asarray(util.k(np.maximum(vv, util.u0)))
    return (cache.y, vv, float(f0 @ wage),
            float(ir.dual_value), float(lic.dual_value))


@dataclass(frozen=True)
class SolverComparison:
    y_grid: np.ndarray
    density: np.ndarray
    wage_active: np.ndarray
    wage_grid: np.ndarray
    stable: np.ndarray
    objective_active: float
    objective_grid: float

    @property
    def objective_gap(self) -> float:
        return abs(self.objective_active - self.objective_grid)

    @property
    def objective_gap_rel(self) -> float:
        denom = max(abs(self.objective_grid), 1e-300)
        return self.objective_gap / denom

    def max_stable_wage_diff(self) -> float:
        diff = np.abs(self.wage_active - self.wage_grid)
        return float(np.max(diff[self.stable])) if np.any(self.stable) else 0.0

    def to_summary(self) -> dict:
        wage_range = float(np.max(self.wage_grid) - np.min(self.wage_grid))
        return {
            "objective_active": self.objective_active,
            "objective_grid": self.objective_grid,
            "objective_gap_rel": self.objective_gap_rel,
            "max_stable_wage_diff": self.max_stable_wage_diff(),
            "wage_range": wage_range,
            "n_unstable": int(np.sum(~self.stable)),
        }


def compare_solvers(problem: ProblemSpec, n_y: int = None,
                    n_a: int = None) -> SolverComparison:
    """Run both solvers on one instance and difference their contracts."""
    from .active_set import solve as solve_active

    gsol = solve_grid(problem, n_y, n_a)
    asol = solve_active(problem, n_grid=n_y)
    wage_active = np.asarray(asol.contract.wage_at(gsol.y_grid), dtype=float)
    return SolverComparison(
        y_grid=gsol.y_grid,
        density=gsol.f0,
        wage_active=wage_active,
        wage_grid=gsol.wage_values(problem),
        stable=gsol.stable(),
        objective_active=float(asol.expected_wage),
        objective_grid=float(gsol.expected_wage),
    )
