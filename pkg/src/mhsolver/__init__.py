"""Optimal contracting under moral hazard with limited liability.

Solves the principal's cost minimization over wage contracts when the
agent's action is hidden: the relaxed problem (participation plus local
incentive compatibility), the full problem via active-set constraint
generation with a discretized convex-program fallback, and first-order
approach validity certification.
"""

from .active_set import Provenance, SolveResult, build_cache, solve
from .contracts import CanonicalContract, ThresholdReport
from .errors import (
    BelowLimitedLiability,
    Diverged,
    GridFallbackFailed,
    Infeasible,
    MHSolverError,
    NoBracket,
    NoConvergence,
    NoTransition,
    OutOfSupport,
    ParseError,
    ScoreNotInvertible,
    ScoreOutOfRange,
    ValidationError,
)
from .grid import GridSolution, SolverComparison, compare_solvers, solve_grid
from .numerics import Interval, Tolerances
from .preferences import (
    CARAUtility,
    CostSpec,
    CRRAUtility,
    LogUtility,
    Utility,
    cost_from_config,
    utility_from_config,
)
from .problem import GridSpec, ProblemSpec, problem_from_dict
from .relaxed import (
    FrontierPoint,
    RelaxedSolution,
    lic_mu,
    multiplier_seeds,
    pareto_frontier,
    solve_relaxed,
)
from .validator import FoaReport, foa_threshold, validate_foa

__version__ = "0.1.0"

__all__ = [
    "BelowLimitedLiability",
    "CanonicalContract",
    "CARAUtility",
    "compare_solvers",
    "cost_from_config",
    "CostSpec",
    "CRRAUtility",
    "Diverged",
    "foa_threshold",
    "FoaReport",
    "FrontierPoint",
    "GridFallbackFailed",
    "GridSolution",
    "GridSpec",
    "Infeasible",
    "Interval",
    "lic_mu",
    "LogUtility",
    "MHSolverError",
    "multiplier_seeds",
    "NoBracket",
    "NoConvergence",
    "NoTransition",
    "OutOfSupport",
    "pareto_frontier",
    "ParseError",
    "ProblemSpec",
    "problem_from_dict",
    "Provenance",
    "RelaxedSolution",
    "ScoreNotInvertible",
    "ScoreOutOfRange",
    "solve",
    "solve_grid",
    "solve_relaxed",
    "SolveResult",
    "SolverComparison",
    "ThresholdReport",
    "Tolerances",
    "Utility",
    "utility_from_config",
    "validate_foa",
    "ValidationError",
    "build_cache",
]
