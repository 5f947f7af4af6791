"""Problem instances: distribution + preferences + intended action + options."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import distributions, preferences
from .distributions import OutputDistribution
from .errors import ValidationError
from .numerics import Interval, Tolerances
from .preferences import CostSpec, Utility

__all__ = ["GridSpec", "ProblemSpec", "problem_from_dict"]

# Probability mass covered by outcome-grid and integration truncation.
TRUNCATION_MASS = 1.0 - 1e-12


@dataclass(frozen=True)
class GridSpec:
    n_outcome: int = 401
    n_action: int = 200

    def __post_init__(self):
        if self.n_outcome < 51:
            raise ValidationError("n_outcome must be >= 51")
        if self.n_action < 20:
            raise ValidationError("n_action must be >= 20")


@dataclass(frozen=True)
class ProblemSpec:
    distribution: OutputDistribution
    utility: Utility
    cost: CostSpec
    a0: float
    action_interval: tuple
    reservation_utility: float
    tolerances: Tolerances = field(default_factory=Tolerances)
    grids: GridSpec = field(default_factory=GridSpec)
    #: optional sweep grid (sorted ascending) used by sweep/pareto commands
    reservation_utility_grid: tuple = ()

    def __post_init__(self):
        a_min, a_max = self.action_interval
        if not (0.0 <= a_min < a_max):
            raise ValidationError("action interval must satisfy 0 <= a_min < a_max")
        if not (a_min <= self.a0 <= a_max):
            raise ValidationError("a0 must lie in the action interval")
        if not self.a0 > 0:
            raise ValidationError("intended action a0 must be positive")
        self.distribution.check_action(self.a0)

    def with_reservation_utility(self, u_bar: float) -> "ProblemSpec":
        return replace(self, reservation_utility=float(u_bar))

    @property
    def action_domain(self) -> Interval:
        """Action interval clipped to the family's admissible actions.

        Families like exponential or Poisson are degenerate at a = 0, so
        the scan interval is nudged inside the open action domain.
        """
        d = self.distribution
        lo = max(self.action_interval[0], d.action_lo)
        hi = min(self.action_interval[1], d.action_hi)
        if lo <= d.action_lo:
            lo = d.action_lo + 1e-8 * (1.0 + abs(self.a0))
        if hi >= d.action_hi:
            hi = d.action_hi - 1e-8
        return Interval(lo, hi)

    def outcome_window(self, a: float) -> Interval:
        """Truncated integration window for integrals against f(.|a)."""
        return self.distribution.quantile_bounds(a, TRUNCATION_MASS)

    def window_is_extreme(self, a: float) -> bool:
        """True when the truncation window dwarfs the central mass region.

        Heavy tails (low-nu Student-t) push the 1 - 1e-12 window out by
        many orders of magnitude; uniform panels and grids are useless
        there and quantile-based placement takes over.
        """
        window = self.outcome_window(a)
        if window.discrete:
            return False
        central = self.distribution.quantile_bounds(a, 0.999)
        return window.width > 20.0 * central.width

    def outcome_panel_hints(self, a: float) -> tuple:
        """Extra quadrature panel edges for integrals against f(.|a)."""
        if not self.window_is_extreme(a):
            return ()
        window = self.outcome_window(a)
        return tuple(h for h in self.distribution.panel_hints(a)
                     if window.lo < h < window.hi)


def _require_keys(cfg: dict, required, optional, what: str) -> None:
    missing = set(required) - set(cfg)
    if missing:
        raise ValidationError(f"{what} config missing keys {sorted(missing)}")
    unknown = set(cfg) - set(required) - set(optional)
    if unknown:
        raise ValidationError(f"unknown {what} keys {sorted(unknown)}")


def problem_from_dict(cfg: dict) -> ProblemSpec:
    """Validate and build a ProblemSpec from a parsed JSON config."""
    _require_keys(
        cfg,
        required={"distribution", "utility", "cost", "a0", "action_interval",
                  "reservation_utility"},
        optional={"tolerances", "grids"},
        what="problem")
    dist = distributions.from_config(dict(cfg["distribution"]))
    util = preferences.utility_from_config(dict(cfg["utility"]))
    cost = preferences.cost_from_config(dict(cfg["cost"]))

    interval = cfg["action_interval"]
    if not (isinstance(interval, (list, tuple)) and len(interval) == 2):
        raise ValidationError("action_interval must be [a_min, a_max]")

    tol_cfg = dict(cfg.get("tolerances", {}))
    _require_keys(tol_cfg, required=set(),
                  optional={"abs_int", "rel_int", "root_tol", "grad_tol",
                            "deviation_tol", "kkt_tol"},
                  what="tolerances")
    try:
        tol = Tolerances(**{k: float(v) for k, v in tol_cfg.items()})
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    grid_cfg = dict(cfg.get("grids", {}))
    _require_keys(grid_cfg, required=set(), optional={"n_outcome", "n_action"},
                  what="grids")
    grids = GridSpec(**{k: int(v) for k, v in grid_cfg.items()})

    u_bar = cfg["reservation_utility"]
    u_grid: tuple = ()
    if isinstance(u_bar, (list, tuple)):
        if not u_bar:
            raise ValidationError("reservation_utility list must be nonempty")
        u_grid = tuple(sorted(float(u) for u in u_bar))
        u_bar = u_grid[0]

    return ProblemSpec(
        distribution=dist,
        utility=util,
        cost=cost,
        a0=float(cfg["a0"]),
        action_interval=(float(interval[0]), float(interval[1])),
        reservation_utility=float(u_bar),
        tolerances=tol,
        grids=grids,
        reservation_utility_grid=u_grid,
    )
