"""Relaxed cost minimization: IR + local incentive compatibility only.

The solution path is two nested monotone roots:

  * for fixed lambda, the local-IC multiplier mu_tilde(lambda) is the
    unique root of mu -> U_a(V(.|lambda, mu), a0), which is nondecreasing
    in mu and negative at mu = 0 (a constant contract gives U_a = -c'(a0));
  * lambda*(U_bar) is the root of lambda -> U_tilde(lambda) - U_bar, where
    U_tilde (the agent's utility along the local-IC family) is strictly
    increasing, with lambda* = 0 when even the cheapest incentive-only
    contract already clears the participation constraint.

Seeds come from the linearized small-incentive approximation: the
participation side gives g(lambda) ~ c(a0) + U_bar, the incentive side
mu g'(lambda) E[S^2] ~ c'(a0). The inner root is solved to 0.1x the outer
tolerance so outer residuals do not inherit inner error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .contracts import CanonicalContract
from .errors import Infeasible, NoBracket
from .numerics import find_root_monotone, integrate
from .problem import ProblemSpec

__all__ = [
    "RelaxedSolution",
    "FrontierPoint",
    "score_second_moment",
    "multiplier_seeds",
    "lic_mu",
    "relaxed_utility",
    "solve_relaxed",
    "pareto_frontier",
]


@dataclass(frozen=True)
class RelaxedSolution:
    lambda_star: float
    mu_star: float
    contract: CanonicalContract
    expected_wage: float
    achieved_utility: float
    ir_binding: bool

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambda_star,
            "mu": self.mu_star,
            "expected_wage": self.expected_wage,
            "achieved_utility": self.achieved_utility,
            "ir_binding": self.ir_binding,
            "contract": self.contract.to_dict(),
        }


@dataclass(frozen=True)
class FrontierPoint:
    reservation_utility: float
    feasible: bool
    expected_wage: float = np.nan
    lambda_star: float = np.nan
    mu_star: float = np.nan
    ir_binding: bool = False


def score_second_moment(problem: ProblemSpec) -> float:
    """E[S(y|a0)^2 | a0], the information content of output about effort."""
    d = problem.distribution
    a0 = problem.a0
    window = problem.outcome_window(a0)
    return integrate(lambda y: d.score(y, a0) ** 2 * d.density(y, a0),
                     window, problem.tolerances,
                     breakpoints=problem.outcome_panel_hints(a0))


def multiplier_seeds(problem: ProblemSpec, lam: float = None):
    """(lambda_seed, mu_seed) from the linearized approximation."""
    util = problem.utility
    cost = problem.cost
    if lam is None:
        v_target = problem.reservation_utility + float(cost.cost(problem.a0))
        v_target = max(v_target, util.u0)
        if util.u_sup is not None and v_target >= util.u_sup:
            # k' undefined at or above the utility's upper bound; seed from
            # the kink and let solve_relaxed report infeasibility properly.
            lam = 2.0 * util.z_kink
        else:
            lam = float(util.k_prime(v_target))
    z_eff = max(lam, util.z_kink) * (1.0 + 1e-9)
    i_s2 = score_second_moment(problem)
    mu = float(cost.cost_d(problem.a0)) / (float(util.g_prime(z_eff)) * i_s2)
    return float(lam), float(mu)


def _u_a_of_mu(problem, lam):
    def fn(mu):
        c = CanonicalContract(lam=lam, mu=float(mu), a0=problem.a0, problem=problem)
        return c.agent_marginal_utility(problem.a0)
    return fn


def lic_mu(problem: ProblemSpec, lam: float, seed: float = None,
           inner_scale: float = 0.1) -> float:
    """The unique mu > 0 making the local IC constraint bind at lambda."""
    if seed is None:
        _, seed = multiplier_seeds(problem, lam=lam)
    tol = replace(problem.tolerances,
                  root_tol=problem.tolerances.root_tol * inner_scale)
    try:
        mu = find_root_monotone(_u_a_of_mu(problem, lam), seed, +1, tol)
    except NoBracket as exc:
        raise Infeasible(
            f"no local-IC multiplier found at lambda={lam}: {exc}") from exc
    return float(mu)


def relaxed_utility(problem: ProblemSpec, lam: float, mu: float = None) -> float:
    """U_tilde(lambda): agent utility along the local-IC contract family."""
    if mu is None:
        mu = lic_mu(problem, lam)
    c = CanonicalContract(lam=lam, mu=mu, a0=problem.a0, problem=problem)
    return c.agent_utility(problem.a0)


def solve_relaxed(problem: ProblemSpec, warm=None) -> RelaxedSolution:
    """Solve the relaxed problem for the instance's reservation utility.

    ``warm`` is an optional (lambda, mu) pair from a neighboring solve
    (frontier sweeps pass the previous point's multipliers).
    """
    util = problem.utility
    u_bar = problem.reservation_utility
    if np.isfinite(util.u_sup) and u_bar >= util.u_sup - float(problem.cost.cost(problem.a0)):
        raise Infeasible(
            f"reservation utility {u_bar} is not attainable: utility is "
            f"bounded above by {util.u_sup}")

    mu_memo: dict = {}

    def mu_at(lam):
        if lam not in mu_memo:
            seed = warm[1] if (warm is not None and not mu_memo) else None
            if mu_memo and seed is None:
                # Warm-start from the most recently solved lambda.
                seed = mu_memo[next(reversed(mu_memo))]
            mu_memo[lam] = lic_mu(problem, lam, seed=seed)
        return mu_memo[lam]

    def participation_gap(lam):
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        return relaxed_utility(problem, lam, mu=mu_at(lam)) - u_bar

    gap0 = participation_gap(0.0)
    if gap0 >= 0.0:
        lam_star = 0.0
    else:
        lam_seed = warm[0] if warm is not None else multiplier_seeds(problem)[0]
        lam_seed = max(lam_seed, problem.tolerances.root_tol)
        try:
            lam_star = find_root_monotone(participation_gap, lam_seed, +1,
                                          problem.tolerances)
        except NoBracket as exc:
            raise Infeasible(
                f"participation constraint unreachable at reservation "
                f"utility {u_bar}: {exc}") from exc
    mu_star = mu_at(lam_star)
    contract = CanonicalContract(lam=lam_star, mu=mu_star, a0=problem.a0,
                                 problem=problem)
    achieved = contract.agent_utility(problem.a0)
    omega = contract.expected_wage(problem.a0)
    ir_binding = abs(achieved - u_bar) <= max(
        problem.tolerances.root_tol, 1e-9 * (1.0 + abs(u_bar)))
    return RelaxedSolution(
        lambda_star=float(lam_star),
        mu_star=float(mu_star),
        contract=contract,
        expected_wage=float(omega),
        achieved_utility=float(achieved),
        ir_binding=bool(ir_binding),
    )


def pareto_frontier(problem: ProblemSpec, utility_grid) -> list:
    """One relaxed solve per grid point, warm-started left to right.

    Infeasible points are carried as explicit markers, never dropped.
    """
    grid = list(utility_grid)
    if any(b < a for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("utility grid must be sorted ascending")
    points = []
    warm = None
    for u_bar in grid:
        sub = problem.with_reservation_utility(u_bar)
        try:
            sol = solve_relaxed(sub, warm=warm)
        except Infeasible:
            points.append(FrontierPoint(reservation_utility=float(u_bar),
                                        feasible=False))
            continue
        warm = (sol.lambda_star, sol.mu_star)
        points.append(FrontierPoint(
            reservation_utility=float(u_bar),
            feasible=True,
            expected_wage=sol.expected_wage,
            lambda_star=sol.lambda_star,
            mu_star=sol.mu_star,
            ir_binding=sol.ir_binding,
        ))
    return points
