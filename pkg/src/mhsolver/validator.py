"""First-order-approach validity certification.

A contract passes when the agent's best global deviation gains at most
deviation_tol utils over the intended action. The certificate is built
from a dense scan of the agent's utility over the action interval with
golden-section refinement of every local peak, plus a concavity census of
the second derivative on the same grid. Validity is operational, not
symbolic: continuous action sets only admit tolerance-based checks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .contracts import CanonicalContract
from .errors import NoTransition
from .problem import ProblemSpec
from .relaxed import solve_relaxed

__all__ = ["FoaReport", "validate_foa", "foa_threshold"]

_SCAN_POINTS = 2001
_QUAD_SCAN_POINTS = 301
_BRACKET_SCAN = 32
_BISECT_ITERS = 12


@dataclass(frozen=True)
class FoaReport:
    valid: bool
    best_action: float
    max_gain: float
    local_maxima: tuple  # ((action, utility), ...), best_action included
    concave_everywhere: bool
    min_u_aa: float
    zero_pay_prob: float

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "best_action": self.best_action,
            "max_gain": self.max_gain,
            "local_maxima": [[a, u] for a, u in self.local_maxima],
            "concave_everywhere": self.concave_everywhere,
            "min_U_aa": self.min_u_aa,
            "zero_pay_prob": self.zero_pay_prob,
        }


def _zero_pay(contract: CanonicalContract) -> float:
    if not contract.deviations and contract.mu > 0:
        return contract.threshold_report().zero_pay_prob
    return contract._zero_wage_prob()


def validate_foa(contract: CanonicalContract, problem: ProblemSpec = None,
                 cache=None, n_scan: int = _SCAN_POINTS) -> FoaReport:
    """Global best-deviation search and concavity census for a contract."""
    from .active_set import build_cache

    if problem is None:
        problem = contract.problem
    if cache is None:
        cache = build_cache(problem)
    tol = problem.tolerances
    dom = problem.action_domain

    v = np.asarray(contract.utility_at(cache.y), dtype=float)
    # Heavy-tailed windows leave the cache with utility bias above the
    # deviation tolerance; the scan then evaluates true utilities by
    # quadrature (fewer points, each one exact to integration tolerance).
    extreme = problem.window_is_extreme(problem.a0)
    if extreme:
        n_scan = min(n_scan, _QUAD_SCAN_POINTS)

        def u_of(a):
            return contract.agent_utility(float(a))
    else:
        def u_of(a):
            return cache.agent_utility(v, float(a))

    actions = np.linspace(dom.lo, dom.hi, n_scan)
    u_vals = np.array([u_of(a) for a in actions])
    u_aa = np.array([cache.agent_utility_second(v, a) for a in actions])

    # Interior local peaks plus both endpoints as candidate maxima.
    peak_idx = [i for i in range(1, n_scan - 1)
                if u_vals[i] >= u_vals[i - 1] and u_vals[i] >= u_vals[i + 1]]
    if u_vals[0] >= u_vals[1]:
        peak_idx.insert(0, 0)
    if u_vals[-1] >= u_vals[-2]:
        peak_idx.append(n_scan - 1)

    maxima = []
    for i in peak_idx:
        lo = actions[max(i - 1, 0)]
        hi = actions[min(i + 1, n_scan - 1)]
        if hi - lo <= tol.root_tol:
            a_star, u_star = float(actions[i]), float(u_vals[i])
        else:
            res = optimize.minimize_scalar(
                lambda a: -u_of(a),
                bounds=(lo, hi), method="bounded",
                options={"xatol": tol.root_tol})
            a_star, u_star = float(res.x), float(-res.fun)
            if u_star < u_vals[i]:
                a_star, u_star = float(actions[i]), float(u_vals[i])
        # Merge refinements that collapse onto an already-found peak.
        if maxima and abs(a_star - maxima[-1][0]) <= 1e-6 * (1.0 + abs(a_star)):
            if u_star > maxima[-1][1]:
                maxima[-1] = (a_star, u_star)
            continue
        maxima.append((a_star, u_star))

    u0 = u_of(problem.a0)
    best_action, _ = max(maxima, key=lambda t: t[1]) if maxima \
        else (problem.a0, u0)
    # The scan localizes the best deviation; the reported gain is computed
    # with adaptive quadrature so the valid flag does not inherit grid error.
    max_gain = (contract.agent_utility(best_action)
                - contract.agent_utility(problem.a0))
    min_u_aa = float(np.min(u_aa))
    concave = bool(np.max(u_aa) <= 1e-9 * (1.0 + abs(min_u_aa)))

    return FoaReport(
        valid=bool(max_gain <= tol.deviation_tol),
        best_action=float(best_action),
        max_gain=float(max_gain),
        local_maxima=tuple(maxima),
        concave_everywhere=concave,
        min_u_aa=min_u_aa,
        zero_pay_prob=float(_zero_pay(contract)),
    )


def foa_threshold(problem: ProblemSpec, u_lo: float, u_hi: float) -> float:
    """Approximate reservation utility where FOA validity switches on.

    Validity in the reservation utility is an eventual property, not a
    guaranteed monotone one, so the bracket is scanned before bisection
    and non-monotone pockets are reported instead of being averaged away.
    """
    if not u_lo < u_hi:
        raise ValueError("need u_lo < u_hi")
    from .active_set import build_cache

    cache = build_cache(problem)
    warm = None

    def is_valid(u_bar):
        nonlocal warm
        sol = solve_relaxed(problem.with_reservation_utility(u_bar), warm=warm)
        warm = (sol.lambda_star, sol.mu_star)
        return validate_foa(sol.contract, problem, cache=cache).valid

    grid = np.linspace(u_lo, u_hi, _BRACKET_SCAN)
    flags = [is_valid(u) for u in grid]
    if flags[0] or not flags[-1]:
        raise NoTransition(
            f"no invalid-to-valid transition on [{u_lo}, {u_hi}]: "
            f"endpoints valid=({flags[0]}, {flags[-1]})")

    # Bracket the last switch; report any earlier non-monotone pockets.
    switches = [i for i in range(_BRACKET_SCAN - 1) if flags[i] != flags[i + 1]]
    if len(switches) > 1:
        warnings.warn(
            f"validity is non-monotone on the scan: switches near "
            f"{[float(grid[i]) for i in switches]}", stacklevel=2)
    i = switches[-1]
    lo, hi = float(grid[i]), float(grid[i + 1])
    warm = None
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if is_valid(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
