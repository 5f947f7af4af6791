"""Canonical contracts and their pointwise / integrated evaluation.

A canonical contract pays utility

    v(y) = g( lambda + mu * S(y|a0) + sum_i mu_hat_i * (1 - f(y|a_hat_i) / f(y|a0)) )

where g is the link function. The deviation terms are only present for
contracts produced by the active-set solver; relaxed contracts have none.
Density ratios are computed in log space so tails where both densities
underflow stay finite.

Integrals are taken over quantile-truncated windows, with panel edges
placed at the kink(s) of v (where the link argument crosses the limited
liability kink) so the composite quadrature keeps full accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Diverged, ScoreNotInvertible, ScoreOutOfRange
from .numerics import Interval, integrate
from .problem import ProblemSpec

__all__ = ["CanonicalContract", "ThresholdReport"]

_WAGE_OVERFLOW = 1e300


@dataclass(frozen=True)
class ThresholdReport:
    """Zero-pay diagnostics of a relaxed contract.

    threshold_outcome is -inf/+inf when the threshold score falls below /
    above the score's image, and nan when the score is not invertible (the
    zero-pay probability is then integrated directly over the zero-wage
    region).
    """

    threshold_score: float
    threshold_outcome: float
    zero_pay_prob: float


@dataclass(frozen=True)
class CanonicalContract:
    lam: float
    mu: float
    a0: float
    problem: ProblemSpec
    deviations: tuple = ()  # ((a_hat, mu_hat), ...)

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        for a_hat, mu_hat in self.deviations:
            if mu_hat < 0:
                raise ValueError("deviation multipliers must be nonnegative")
            if abs(a_hat - self.a0) < 1e-12 * (1.0 + abs(self.a0)):
                raise ValueError("deviation action coincides with a0")

    # -- pointwise -------------------------------------------------------
    def link_arg(self, y):
        """The marginal-cost argument fed to the link function."""
        d = self.problem.distribution
        y = np.asarray(y, dtype=float)
        z = self.lam + self.mu * d.score(y, self.a0)
        if self.deviations:
            logf0 = d.log_density(y, self.a0)
            for a_hat, mu_hat in self.deviations:
                ratio = np.exp(d.log_density(y, a_hat) - logf0)
                z = z + mu_hat * (1.0 - ratio)
        return z

    def utility_at(self, y):
        return self.problem.utility.link_g(self.link_arg(y))

    def wage_at(self, y):
        return self.problem.utility.wage_of_marginal(self.link_arg(y))

    # -- integrated ------------------------------------------------------
    def agent_utility(self, a: float) -> float:
        """U(v, a) = int v(y) f(y|a) dy - c(a)."""
        d = self.problem.distribution
        val = self._integrate_against(
            lambda y: self.utility_at(y) * d.density(y, a), a)
        return val - float(self.problem.cost.cost(a))

    def agent_marginal_utility(self, a: float) -> float:
        """U_a alone; the local-IC root-finder calls this in a tight loop."""
        d = self.problem.distribution

        def fn(y):
            fa, _ = d.density_derivs(y, a)
            return self.utility_at(y) * fa

        return self._integrate_against(fn, a) - float(self.problem.cost.cost_d(a))

    def agent_utility_derivs(self, a: float):
        """(U_a, U_aa) via the closed-form density derivatives."""
        d = self.problem.distribution

        def fn_a(y):
            fa, _ = d.density_derivs(y, a)
            return self.utility_at(y) * fa

        def fn_aa(y):
            _, faa = d.density_derivs(y, a)
            return self.utility_at(y) * faa

        u_a = self._integrate_against(fn_a, a) - float(self.problem.cost.cost_d(a))
        u_aa = self._integrate_against(fn_aa, a) - float(self.problem.cost.cost_dd(a))
        return u_a, u_aa

    def expected_wage(self, a: float) -> float:
        """W(v, a) = int k(v(y)) f(y|a) dy, guarded against divergence."""
        d = self.problem.distribution

        def fn(y):
            w = self.wage_at(y)
            if np.any(w > _WAGE_OVERFLOW):
                raise Diverged("wage exceeded overflow guard")
            return w * d.density(y, a)

        val = self._integrate_against(fn, a)
        if not val < _WAGE_OVERFLOW:
            raise Diverged("expected wage exceeded overflow guard")
        return val

    # -- delta-g decomposition (no-deviation contracts) ------------------
    def delta_g(self, y):
        """(g(lam + mu S) - g(lam)) / (mu S), with its limit at S = 0.

        The singularity at S = 0 is removable; below |mu S| = 1e-12 the
        analytic limit (the link slope at lam, zero inside the kink
        region) is substituted.
        """
        if self.deviations:
            raise ValueError("delta_g is defined for no-deviation contracts")
        util = self.problem.utility
        s = np.asarray(self.problem.distribution.score(y, self.a0), dtype=float)
        ms = self.mu * s
        g_lam = util.link_g(self.lam)
        limit = util.g_prime(self.lam) if self.lam > util.z_kink else 0.0
        small = np.abs(ms) < 1e-12
        safe = np.where(small, 1.0, ms)
        out = (util.link_g(self.lam + ms) - g_lam) / safe
        return np.where(small, limit, out)

    def agent_utility_deltag(self, a: float) -> float:
        """U(v, a) through the delta-g decomposition (independent route)."""
        d = self.problem.distribution
        util = self.problem.utility
        s0 = lambda y: d.score(y, self.a0)
        val = self._integrate_against(
            lambda y: self.delta_g(y) * s0(y) * d.density(y, a), a)
        return float(util.link_g(self.lam)) + self.mu * val - float(self.problem.cost.cost(a))

    def agent_utility_derivs_deltag(self, a: float):
        d = self.problem.distribution
        s0 = lambda y: d.score(y, self.a0)

        def fn_a(y):
            fa, _ = d.density_derivs(y, a)
            return self.delta_g(y) * s0(y) * fa

        def fn_aa(y):
            _, faa = d.density_derivs(y, a)
            return self.delta_g(y) * s0(y) * faa

        u_a = self.mu * self._integrate_against(fn_a, a) - float(self.problem.cost.cost_d(a))
        u_aa = self.mu * self._integrate_against(fn_aa, a) - float(self.problem.cost.cost_dd(a))
        return u_a, u_aa

    # -- diagnostics -----------------------------------------------------
    def threshold_report(self) -> ThresholdReport:
        """Threshold score/outcome and zero-pay probability at a0."""
        if self.deviations:
            raise ValueError("threshold diagnostics apply to relaxed contracts")
        if not self.mu > 0:
            raise ValueError("threshold score needs mu > 0")
        util = self.problem.utility
        d = self.problem.distribution
        s_bar = (util.z_kink - self.lam) / self.mu

        try:
            inv = d.score_inverse(s_bar, self.a0)
        except ScoreOutOfRange as exc:
            if exc.side == "below":
                return ThresholdReport(s_bar, -np.inf, 0.0)
            return ThresholdReport(s_bar, np.inf, 1.0)
        except ScoreNotInvertible:
            return ThresholdReport(s_bar, np.nan, self._zero_wage_prob())

        y_bar = inv.y
        sup = d.support(self.a0)
        window = self.problem.outcome_window(self.a0)
        if y_bar <= window.lo:
            prob = 0.0
        else:
            region = window.clip(sup.lo, y_bar)
            prob = integrate(lambda y: d.density(y, self.a0), region,
                             self.problem.tolerances)
        return ThresholdReport(s_bar, float(y_bar), min(max(prob, 0.0), 1.0))

    def _zero_wage_prob(self) -> float:
        """P(wage = 0 | a0) by direct integration of the zero-wage region."""
        d = self.problem.distribution
        window = self.problem.outcome_window(self.a0)
        z_kink = self.problem.utility.z_kink
        if window.discrete:
            y = window.lattice()
            mask = self.link_arg(y) <= z_kink
            return float(np.sum(d.density(y[mask], self.a0))) if np.any(mask) else 0.0
        hints = self.problem.outcome_panel_hints(self.a0)
        total = 0.0
        for lo, hi in self._zero_wage_segments(window):
            total += integrate(lambda y: d.density(y, self.a0),
                               Interval(lo, hi), self.problem.tolerances,
                               breakpoints=[h for h in hints if lo < h < hi])
        return min(max(total, 0.0), 1.0)

    def _zero_wage_segments(self, window):
        edges = [window.lo] + self._kink_points(window, self.a0) + [window.hi]
        z_kink = self.problem.utility.z_kink
        segments = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo < 1e-300:
                continue
            mid = 0.5 * (lo + hi)
            if float(self.link_arg(mid)) <= z_kink:
                segments.append((lo, hi))
        return segments

    def _kink_points(self, window, a: float = None) -> list:
        """Outcomes where the link argument crosses the liability kink."""
        if window.discrete:
            return []
        z_kink = self.problem.utility.z_kink
        y = np.linspace(window.lo, window.hi, 2049)
        if a is not None and self.problem.window_is_extreme(a):
            # The uniform probe is too sparse on an extreme window; the
            # kinks live where the score is non-negligible, i.e. centrally.
            central = self.problem.distribution.quantile_bounds(a, 1.0 - 1e-9)
            dense = np.linspace(max(central.lo, window.lo),
                                min(central.hi, window.hi), 2049)
            y = np.unique(np.concatenate([y, dense]))
        h = self.link_arg(y) - z_kink
        idx = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]
        points = []
        for i in idx:
            lo, hi = y[i], y[i + 1]
            flo = h[i]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = float(self.link_arg(mid)) - z_kink
                if fm == 0.0:
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            points.append(0.5 * (lo + hi))
        return points

    # -- plumbing --------------------------------------------------------
    def _integrate_against(self, fn, a: float) -> float:
        window = self.problem.outcome_window(a)
        if window.discrete:
            breaks = ()
        else:
            breaks = tuple(self._kink_points(window, a))
            breaks += self.problem.outcome_panel_hints(a)
        return integrate(fn, window, self.problem.tolerances, breakpoints=breaks)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "a0": self.a0,
            "deviations": [{"a_hat": a, "mu_hat": m} for a, m in self.deviations],
        }

    @classmethod
    def from_dict(cls, d: dict, problem: ProblemSpec) -> "CanonicalContract":
        return cls(
            lam=float(d["lambda"]),
            mu=float(d["mu"]),
            a0=float(d["a0"]),
            problem=problem,
            deviations=tuple((float(x["a_hat"]), float(x["mu_hat"]))
                             for x in d.get("deviations", [])),
        )
