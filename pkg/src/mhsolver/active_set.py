"""Full cost minimization via active-set constraint generation.

The loop maximizes the Lagrange dual over (lambda, mu, mu_hat) for a
growing finite set of deviation actions. The inner minimization over
contracts is available in closed form (the canonical contract with
deviation terms), so a dual call reduces to matrix products against a
cached outcome grid. The first dual maximization (no deviations) is
carried out by the relaxed solver's nested root-finding, which maximizes
the same dual to quadrature accuracy and handles the lambda = 0 corner;
later iterations use projected quasi-Newton ascent on the cached dual,
warm-started, then a quadrature-accurate polish of the stationarity
system. When ascent stalls, the constraint heuristic cycles, or the
deviation budget is exhausted, the discretized convex program takes over.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import optimize

from .contracts import CanonicalContract
from .errors import GridFallbackFailed, Infeasible, NoConvergence
from .numerics import Interval, maximize_box, maximize_scalar
from .problem import TRUNCATION_MASS, ProblemSpec
from .relaxed import solve_relaxed

__all__ = [
    "OutcomeCache",
    "build_cache",
    "dual_value_grad",
    "find_best_deviation",
    "Provenance",
    "SolveResult",
    "solve",
]

MAX_DEVIATIONS = 25
_ACTION_SCAN = 200  # FindBestDeviation coarse grid


class Provenance(Enum):
    ACTIVE_SET_FIRST_ITERATION = "ActiveSetFirstIteration"
    ACTIVE_SET_MULTI_ITERATION = "ActiveSetMultiIteration"
    GRID_FALLBACK = "GridFallback"


class OutcomeCache:
    """Precomputed outcome-grid quantities for fast dual calls.

    Holds f(y|a0), S(y|a0), f_a(y|a0) and, per active deviation, both
    f(y|a_hat) and the ratio row 1 - f(y|a_hat)/f(y|a0) (computed in log
    space). Ratio rows are appended monotonically as deviations are added.
    """

    def __init__(self, problem: ProblemSpec, y: np.ndarray, weights: np.ndarray):
        d = problem.distribution
        self.problem = problem
        self.y = y
        self.w = weights
        self.f0 = np.asarray(d.density(y, problem.a0), dtype=float)
        self.logf0 = np.asarray(d.log_density(y, problem.a0), dtype=float)
        self.s0 = np.asarray(d.score(y, problem.a0), dtype=float)
        self.fa0 = np.asarray(d.density_derivs(y, problem.a0)[0], dtype=float)
        self.deviations: list = []
        self.f_hat = np.zeros((0, y.size))
        self.ratio_rows = np.zeros((0, y.size))
        self._wf0 = self.w * self.f0
        self._wfa0 = self.w * self.fa0

    @property
    def mass(self) -> float:
        return float(np.sum(self._wf0))

    def set_deviations(self, actions) -> None:
        """Rebuild the deviation rows (used when a polish moves actions)."""
        self.deviations = []
        self.f_hat = np.zeros((0, self.y.size))
        self.ratio_rows = np.zeros((0, self.y.size))
        for a in actions:
            self.add_deviation(float(a))

    def add_deviation(self, a_hat: float) -> None:
        d = self.problem.distribution
        fh = np.asarray(d.density(self.y, a_hat), dtype=float)
        ratio = 1.0 - np.exp(
            np.asarray(d.log_density(self.y, a_hat), dtype=float) - self.logf0)
        self.deviations.append(float(a_hat))
        self.f_hat = np.vstack([self.f_hat, fh])
        self.ratio_rows = np.vstack([self.ratio_rows, ratio])

    def link_arg(self, lam: float, mu: float, mu_hat=()):
        z = lam + mu * self.s0
        for mh, row in zip(mu_hat, self.ratio_rows):
            z = z + mh * row
        return z

    def contract_values(self, lam, mu, mu_hat=()):
        return self.problem.utility.link_g(self.link_arg(lam, mu, mu_hat))

    def agent_utility(self, v: np.ndarray, a: float) -> float:
        """U(v, a) for tabulated contract values v, on this grid."""
        d = self.problem.distribution
        f = np.asarray(d.density(self.y, a), dtype=float)
        return float(np.sum(self.w * v * f) - self.problem.cost.cost(a))

    def agent_utility_second(self, v: np.ndarray, a: float) -> float:
        d = self.problem.distribution
        _, faa = d.density_derivs(self.y, a)
        return float(np.sum(self.w * v * faa) - self.problem.cost.cost_dd(a))


def build_cache(problem: ProblemSpec, n_grid: int = None) -> OutcomeCache:
    """Outcome grid spanning the quantile envelope of the action interval.

    Continuous supports get a uniform grid with trapezoid weights;
    discrete supports use the lattice directly with unit weights.
    """
    if n_grid is None:
        n_grid = problem.grids.n_outcome
    if n_grid < 51:
        raise ValueError("outcome grid needs at least 51 points")
    d = problem.distribution
    dom = problem.action_domain
    lo, hi = np.inf, -np.inf
    for a in (dom.lo, problem.a0, dom.hi):
        b = d.quantile_bounds(a, TRUNCATION_MASS)
        lo, hi = min(lo, b.lo), max(hi, b.hi)
    sup = d.support(problem.a0)
    if sup.discrete:
        lattice = Interval(max(lo, sup.lo), min(hi, sup.hi),
                           discrete=True, step=sup.step).lattice()
        return OutcomeCache(problem, lattice, np.ones_like(lattice))
    if problem.window_is_extreme(problem.a0):
        y = _quantile_grid(problem, n_grid, lo, hi)
        # Quantile grids integrate in probability space: with weights
        # dp_i / f0(y_i) every cached integral becomes a p-space trapezoid
        # of a bounded density ratio, so tail width cannot leak grid error
        # into utilities.
        try:
            p = np.asarray(d.cdf(y, problem.a0), dtype=float)
        except NotImplementedError:
            w = _trapezoid_weights(y)
        else:
            f0 = np.asarray(d.density(y, problem.a0), dtype=float)
            w = _trapezoid_weights(p) / f0
        return OutcomeCache(problem, y, w)
    y = np.linspace(lo, hi, n_grid)
    return OutcomeCache(problem, y, _simpson_weights(y))


def _simpson_weights(y: np.ndarray) -> np.ndarray:
    """Composite Simpson weights on a uniform grid (odd point count).

    Cached utilities must resolve deviation gains near the 1e-6 tolerance;
    Simpson's O(h^4) bias meets that where trapezoid's O(h^2) does not.
    Falls back to trapezoid when the point count is even.
    """
    n = y.size
    if n < 3 or n % 2 == 0:
        return _trapezoid_weights(y)
    h = (y[-1] - y[0]) / (n - 1)
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _trapezoid_weights(y: np.ndarray) -> np.ndarray:
    w = np.empty_like(y)
    w[1:-1] = 0.5 * (y[2:] - y[:-2])
    w[0] = 0.5 * (y[1] - y[0])
    w[-1] = 0.5 * (y[-1] - y[-2])
    return w


def _quantile_grid(problem, n_grid, lo, hi):
    """Mass-concentrated outcome grid for heavy-tailed windows.

    Points are placed in probability space (uniform through the bulk,
    log-spaced in both tails down to 1e-12) and mapped through the
    quantile function at each action anchor, so both the intended-action
    density and deviation densities are resolved where their mass lives.
    """
    d = problem.distribution
    dom = problem.action_domain
    anchors = (dom.lo, problem.a0, dom.hi)
    n_each = max(n_grid // 2, 101)
    n_tail = max(n_each // 4, 24)
    n_bulk = n_each - 2 * n_tail
    tail = np.geomspace(1e-12, 0.02, n_tail)
    probs = np.concatenate([tail, np.linspace(0.02, 0.98, n_bulk),
                            1.0 - tail[::-1]])
    parts = []
    for a in anchors:
        try:
            q = np.asarray(d.quantile(probs, a), dtype=float)
        except (TypeError, ValueError):
            q = np.array([float(d.quantile(pp, a)) for pp in probs])
        parts.append(q)
    y = np.unique(np.concatenate(parts))
    y = y[np.isfinite(y)]
    return y[(y >= lo) & (y <= hi)]


def dual_value_grad(cache: OutcomeCache, lam: float, mu: float, mu_hat=()):
    """Dual value and its analytic (envelope-theorem) gradient.

    The gradient components are the constraint residuals at the inner
    minimizer: (U_bar - U(v,a0), -U_a(v,a0), U(v,a_hat_i) - U(v,a0)).
    """
    problem = cache.problem
    util = problem.utility
    cost = problem.cost
    u_bar = problem.reservation_utility
    mu_hat = np.asarray(mu_hat, dtype=float)

    z = cache.link_arg(lam, mu, mu_hat)
    v = util.link_g(z)
    wage = util.wage_of_marginal(z)

    exp_wage = float(np.sum(cache._wf0 * wage))
    u0 = float(np.sum(cache._wf0 * v)) - float(cost.cost(problem.a0))
    u_a0 = float(np.sum(cache._wfa0 * v)) - float(cost.cost_d(problem.a0))
    u_hats = np.array([
        float(np.sum(cache.w * fh * v)) - float(cost.cost(a_hat))
        for a_hat, fh in zip(cache.deviations, cache.f_hat)
    ])

    value = exp_wage + lam * (u_bar - u0) - mu * u_a0
    value += float(np.sum(mu_hat * (u_hats - u0)))
    grad = np.concatenate(([u_bar - u0, -u_a0], u_hats - u0))
    return value, grad


def find_best_deviation(cache: OutcomeCache, v: np.ndarray):
    """Most profitable action under tabulated contract values v.

    Coarse scan over the admissible action interval, golden refinement of
    the best bracket; gain is relative to the intended action.
    """
    problem = cache.problem

    def objective(a):
        arr = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.array([cache.agent_utility(v, ai) for ai in arr])
        return out if np.ndim(a) else float(out[0])

    a_hat, u_hat = maximize_scalar(objective, problem.action_domain,
                                   _ACTION_SCAN, problem.tolerances)
    gain = u_hat - cache.agent_utility(v, problem.a0)
    return float(a_hat), float(gain)


def _quad_best_deviation(problem, contract, n_scan: int = 301):
    """Best deviation measured with adaptive quadrature throughout.

    Heavy-tailed windows leave the outcome cache with utility bias well
    above the deviation tolerance, so both the scan and the refinement of
    every local peak evaluate the true agent utility. Scan cost is one
    quadrature call per action.
    """
    dom = problem.action_domain
    tol = problem.tolerances
    actions = np.linspace(dom.lo, dom.hi, n_scan)
    u = np.array([contract.agent_utility(float(a)) for a in actions])
    peak_idx = [i for i in range(1, n_scan - 1)
                if u[i] >= u[i - 1] and u[i] >= u[i + 1]]
    if u[0] >= u[1]:
        peak_idx.insert(0, 0)
    if u[-1] >= u[-2]:
        peak_idx.append(n_scan - 1)
    best_a, best_u = problem.a0, contract.agent_utility(problem.a0)
    u0 = best_u
    for i in peak_idx:
        lo = actions[max(i - 1, 0)]
        hi = actions[min(i + 1, n_scan - 1)]
        res = optimize.minimize_scalar(
            lambda a: -contract.agent_utility(float(a)),
            bounds=(lo, hi), method="bounded",
            options={"xatol": tol.root_tol})
        a_i, u_i = float(res.x), float(-res.fun)
        if u[i] > u_i:
            a_i, u_i = float(actions[i]), float(u[i])
        if u_i > best_u:
            best_a, best_u = a_i, u_i
    return float(best_a), float(best_u - u0)


@dataclass(frozen=True)
class SolveResult:
    contract: CanonicalContract
    expected_wage: float
    lam: float
    mu: float
    mu_hat: tuple
    deviations_added: tuple
    foa_report: "FoaReport"  # noqa: F821 - filled by validator
    provenance: Provenance
    wall_time: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "contract": self.contract.to_dict(),
            "expected_wage": self.expected_wage,
            "multipliers": {"lambda": self.lam, "mu": self.mu,
                            "mu_hat": list(self.mu_hat)},
            "deviations_added": list(self.deviations_added),
            "foa_report": self.foa_report.to_dict(),
            "provenance": self.provenance.value,
            "wall_time_ms": self.wall_time * 1e3,
            "iterations": self.iterations,
        }


def _maximize_dual(cache, init, tol):
    """Projected ascent with deterministic multi-start perturbations.

    The dual with deviation constraints is not concave in general, so a
    stalled ascent is retried from mildly perturbed warm starts before
    giving up.
    """
    n_hat = len(cache.deviations)
    lower = np.concatenate(([0.0, -np.inf], np.zeros(n_hat)))
    # Constraint residuals at the cached-dual optimum only need to be
    # resolved below the deviation tolerance: the stationarity polish runs
    # at quadrature accuracy afterwards.
    tol = replace(tol, grad_tol=max(tol.grad_tol, 0.1 * tol.deviation_tol))

    def fn(x):
        return dual_value_grad(cache, x[0], x[1], x[2:])[0]

    def grad(x):
        return dual_value_grad(cache, x[0], x[1], x[2:])[1]

    last_err = None
    for scale in (1.0, 1.05, 0.95):
        start = np.asarray(init, dtype=float) * scale
        try:
            return maximize_box(fn, grad, lower, start, tol)
        except NoConvergence as exc:
            last_err = exc
    raise last_err


def _polish_multipliers(problem, deviations, x0):
    """Quadrature-accurate stationarity solve with a fixed active set.

    The cached dual locates the optimum to grid accuracy; this re-solves
    the residual system (IR, LIC, per-deviation indifference) with the
    adaptive integrator so the reported contract meets the constraint
    tolerances of the continuous problem.
    """
    a0 = problem.a0
    u_bar = problem.reservation_utility

    def residuals(x):
        lam = max(x[0], 0.0)
        c = CanonicalContract(
            lam=lam, mu=x[1], a0=a0, problem=problem,
            deviations=tuple((a, max(m, 0.0))
                             for a, m in zip(deviations, x[2:])))
        r = [c.agent_utility(a0) - u_bar, c.agent_marginal_utility(a0)]
        for a_hat, _ in c.deviations:
            r.append(c.agent_utility(a_hat) - (r[0] + u_bar))
        return np.asarray(r)

    sol = optimize.root(residuals, np.asarray(x0, dtype=float), method="hybr",
                        options={"xtol": problem.tolerances.root_tol})
    x = sol.x
    ok = (sol.success and x[0] >= -problem.tolerances.root_tol
          and np.all(x[2:] >= -problem.tolerances.root_tol))
    if not ok:
        return None
    return np.concatenate(([max(x[0], 0.0), x[1]], np.maximum(x[2:], 0.0)))


def solve(problem: ProblemSpec, n_grid: int = None, warm=None) -> SolveResult:
    """Active-set cost minimization with grid convex-program fallback.

    ``warm`` is an optional (lambda, mu) warm start for the first dual
    maximization.
    """
    from .validator import validate_foa

    t_start = time.perf_counter()
    tol = problem.tolerances
    cache = build_cache(problem, n_grid)

    relaxed_sol = solve_relaxed(problem, warm=warm)  # Infeasible propagates
    lam, mu = relaxed_sol.lambda_star, relaxed_sol.mu_star
    mu_hat = np.zeros(0)
    dedup_radius = tol.root_tol * (1.0 + abs(problem.a0))
    fallback_reason = None
    iterations = 0

    # Heavy-tailed windows leave the cached utilities with bias above the
    # deviation tolerance, so the stopping test switches to quadrature
    # search (with a stationarity polish first, otherwise cache-accurate
    # multipliers show phantom gains at already-constrained actions).
    extreme = problem.window_is_extreme(problem.a0)

    for iterations in range(1, MAX_DEVIATIONS + 2):
        if extreme:
            if cache.deviations:
                lam, mu, mu_hat, acts = _polish_active(
                    problem, cache.deviations, lam, mu, mu_hat)
                if acts != cache.deviations:
                    cache.set_deviations(acts)
            trial = CanonicalContract(
                lam=lam, mu=mu, a0=problem.a0, problem=problem,
                deviations=tuple((a, max(m, 0.0))
                                 for a, m in zip(cache.deviations, mu_hat)))
            a_hat, gain = _quad_best_deviation(problem, trial)
            if gain <= tol.deviation_tol:
                break
        else:
            v = cache.contract_values(lam, mu, mu_hat)
            a_hat, gain = find_best_deviation(cache, v)
            if gain <= tol.deviation_tol:
                break
            # The cache scan locates the candidate; the committing decision
            # is confirmed with adaptive quadrature so grid error cannot
            # spin the loop on phantom sub-tolerance gains.
            trial = CanonicalContract(
                lam=lam, mu=mu, a0=problem.a0, problem=problem,
                deviations=tuple((a, max(m, 0.0))
                                 for a, m in zip(cache.deviations, mu_hat)))
            gain_q = trial.agent_utility(a_hat) - trial.agent_utility(problem.a0)
            if gain_q <= tol.deviation_tol:
                break
        if any(abs(a_hat - a) <= dedup_radius for a in cache.deviations):
            fallback_reason = f"constraint heuristic cycled at a_hat={a_hat}"
            break
        if len(cache.deviations) >= MAX_DEVIATIONS:
            fallback_reason = "deviation budget exhausted"
            break
        cache.add_deviation(a_hat)
        mu_hat = np.append(mu_hat, 0.0)  # warm start for the new multiplier
        try:
            x = _maximize_dual(cache, np.concatenate(([lam, mu], mu_hat)), tol)
        except NoConvergence as exc:
            fallback_reason = f"dual ascent stalled: {exc}"
            break
        lam, mu, mu_hat = float(x[0]), float(x[1]), x[2:]

    if fallback_reason is not None:
        lam, mu, mu_hat, deviations = _grid_fallback(problem, cache, fallback_reason)
        provenance = Provenance.GRID_FALLBACK
    else:
        deviations = list(cache.deviations)
        if deviations:
            lam, mu, mu_hat, deviations = _polish_active(
                problem, deviations, lam, mu, mu_hat)
            provenance = Provenance.ACTIVE_SET_MULTI_ITERATION
        else:
            provenance = Provenance.ACTIVE_SET_FIRST_ITERATION

    # Zero-multiplier deviations are kept on the contract: they record which
    # constraints were generated, and cost nothing in evaluation.
    active = tuple((a, float(m)) for a, m in zip(deviations, mu_hat))
    contract = CanonicalContract(lam=lam, mu=mu, a0=problem.a0,
                                 problem=problem, deviations=active)
    if provenance is Provenance.ACTIVE_SET_FIRST_ITERATION:
        expected_wage = relaxed_sol.expected_wage
    else:
        expected_wage = contract.expected_wage(problem.a0)
    foa = validate_foa(contract, problem, cache=cache)
    return SolveResult(
        contract=contract,
        expected_wage=float(expected_wage),
        lam=float(lam),
        mu=float(mu),
        mu_hat=tuple(float(m) for m in mu_hat),
        deviations_added=tuple(deviations),
        foa_report=foa,
        provenance=provenance,
        wall_time=time.perf_counter() - t_start,
        iterations=iterations,
    )


def _polish_active(problem, deviations, lam, mu, mu_hat):
    """Quadrature-accurate polish of the active constraints.

    Only positive-multiplier deviations enter the stationarity system
    (zero-multiplier indifference rows would make it singular; they stay
    on the record with multiplier zero). Interior deviation actions are
    free unknowns with the tangency condition U_a(a_hat) = 0, so binding
    deviations track the agent's true local maxima instead of their
    grid-localized estimates. Returns (lam, mu, mu_hat, actions); on
    solver failure the inputs come back unchanged.
    """
    deviations = [float(a) for a in deviations]
    mu_hat = np.asarray(mu_hat, dtype=float)
    active = [i for i, m in enumerate(mu_hat) if m > 1e-12]
    if not active:
        return lam, mu, mu_hat, deviations
    dom = problem.action_domain
    edge = 1e-7 * (1.0 + dom.width)
    interior = [i for i in active
                if deviations[i] - dom.lo > edge and dom.hi - deviations[i] > edge]
    a0 = problem.a0
    u_bar = problem.reservation_utility
    root_tol = problem.tolerances.root_tol
    n_act = len(active)

    def unpack(x):
        m = np.maximum(x[2:2 + n_act], 0.0)
        acts = list(deviations)
        for j, i in enumerate(interior):
            acts[i] = float(np.clip(x[2 + n_act + j], dom.lo, dom.hi))
        return max(x[0], 0.0), x[1], m, acts

    def residuals(x):
        lam_x, mu_x, m, acts = unpack(x)
        c = CanonicalContract(
            lam=lam_x, mu=mu_x, a0=a0, problem=problem,
            deviations=tuple((acts[i], m[j]) for j, i in enumerate(active)))
        u0 = c.agent_utility(a0)
        r = [u0 - u_bar, c.agent_marginal_utility(a0)]
        for i in active:
            r.append(c.agent_utility(acts[i]) - u0)
        for i in interior:
            r.append(c.agent_marginal_utility(acts[i]))
        return np.asarray(r)

    x0 = np.concatenate(([lam, mu], mu_hat[active],
                         [deviations[i] for i in interior]))
    sol = optimize.root(residuals, x0, method="hybr",
                        options={"xtol": root_tol})
    ok = (sol.success and sol.x[0] >= -root_tol
          and np.all(sol.x[2:2 + n_act] >= -root_tol))
    if not ok:
        return lam, mu, mu_hat, deviations
    lam_x, mu_x, m, acts = unpack(sol.x)
    out = np.zeros_like(mu_hat)
    out[active] = m
    return float(lam_x), float(mu_x), out, acts


def _grid_fallback(problem, cache, reason):
    """Recover multipliers and an active set from the convex program."""
    from .grid import solve_grid

    try:
        gsol = solve_grid(problem, problem.grids.n_outcome, problem.grids.n_action)
    except Infeasible:
        raise
    except Exception as exc:
        raise GridFallbackFailed(
            f"active set failed ({reason}) and grid solver failed: {exc}") from exc

    dedup = 2.0 * (problem.action_domain.width / problem.grids.n_action)
    deviations = []
    duals = []
    for a_hat, m in zip(gsol.binding_actions, gsol.binding_multipliers):
        if abs(a_hat - problem.a0) <= dedup:
            continue
        if any(abs(a_hat - a) <= dedup for a in deviations):
            continue
        deviations.append(float(a_hat))
        duals.append(float(m))

    # Rebuild a cache with the grid-identified active set and re-maximize.
    fresh = build_cache(problem)
    for a in deviations:
        fresh.add_deviation(a)
    from .relaxed import lic_mu
    lam0 = max(gsol.ir_dual, 0.0)
    try:
        mu0 = lic_mu(problem, lam0)
    except Infeasible:
        mu0 = 1.0
    init = np.concatenate(([lam0, mu0], np.asarray(duals)))
    try:
        x = _maximize_dual(fresh, init, problem.tolerances)
        lam, mu, mu_hat = float(x[0]), float(x[1]), x[2:]
    except NoConvergence as exc:
        # Last resort: skip the cached ascent and solve the stationarity
        # system directly from the grid duals.
        polished = _polish_multipliers(problem, deviations, init)
        if polished is None:
            raise GridFallbackFailed(
                f"active set failed ({reason}); dual re-maximization from "
                f"grid duals also failed: {exc}") from exc
        return (float(polished[0]), float(polished[1]), polished[2:],
                deviations)
    lam, mu, mu_hat, deviations = _polish_active(
        problem, deviations, lam, mu, mu_hat)
    return lam, mu, np.asarray(mu_hat, dtype=float), deviations
