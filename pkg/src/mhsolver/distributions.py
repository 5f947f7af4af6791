"""Output-distribution families parameterized by the agent's action.

Each family exposes the density f(y|a), its first and second action
derivatives, the score S(y|a) = f_a / f in closed form (never as a
numerical quotient -- the quotient is 0/0-unstable exactly in the tails
where the contract kink lives), the score inverse where the score is
monotone, the support, the mean, and conservative tail quantile bounds
used to truncate integrals.

Action derivatives come from the score identities

    f_a  = S * f,
    f_aa = (dS/da + S^2) * f,

with dS/da hand-derived per family and cross-checked against central
finite differences in the test suite.

All outcome arguments accept numpy arrays; actions are scalars.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special, stats

from .errors import OutOfSupport, ScoreNotInvertible, ScoreOutOfRange
from .numerics import Interval

__all__ = [
    "ScoreShape",
    "ScoreInverse",
    "OutputDistribution",
    "Gaussian",
    "LogNormal",
    "Poisson",
    "Exponential",
    "Bernoulli",
    "Geometric",
    "Binomial",
    "Gamma",
    "StudentT",
    "LocationFamily",
    "ScaleFamily",
    "FAMILIES",
    "from_config",
]

_LOG_2PI = np.log(2.0 * np.pi)
# Fraction of tail mass assigned per side and relative widening applied to
# continuous quantile bounds. The widening keeps the bounds conservative
# (e.g. the standard normal bound at mass 1 - 1e-12 contains [-8, 8]).
_TAIL_SPLIT = 0.25
_PAD = 0.15
# Nested coverage masses whose quantile bounds serve as panel hints.
_HINT_MASSES = (0.2, 0.5, 0.8, 0.9, 0.99,
                1.0 - 1e-3, 1.0 - 1e-4, 1.0 - 1e-6, 1.0 - 1e-8, 1.0 - 1e-10)


@dataclass(frozen=True)
class ScoreShape:
    monotone: bool
    unbounded_below: bool
    unbounded_above: bool


class ScoreInverse(NamedTuple):
    y: float
    exact: bool


def _as_array(y):
    return np.asarray(y, dtype=float)


class OutputDistribution:
    """Base class; subclasses fill in the Table-of-families closed forms."""

    #: open action-domain bounds (lo, hi)
    action_lo: float = -np.inf
    action_hi: float = np.inf

    def check_action(self, a: float) -> None:
        if not (self.action_lo < a < self.action_hi):
            raise ValueError(
                f"{type(self).__name__}: action {a} outside domain "
                f"({self.action_lo}, {self.action_hi})")

    # -- interface -------------------------------------------------------
    def support(self, a: float) -> Interval:
        raise NotImplementedError

    def log_density(self, y, a: float):
        raise NotImplementedError

    def score(self, y, a: float):
        raise NotImplementedError

    def score_action_slope(self, y, a: float):
        """dS/da, used for the second action derivative of the density."""
        raise NotImplementedError

    def mean(self, a: float) -> float:
        raise NotImplementedError

    def quantile_bounds(self, a: float, mass: float) -> Interval:
        raise NotImplementedError

    def quantile(self, p, a: float):
        """Outcome quantile function; vectorized over p where available."""
        raise NotImplementedError(
            f"{type(self).__name__} does not expose a quantile function")

    def cdf(self, y, a: float):
        """P(Y <= y | a); vectorized over y where available."""
        raise NotImplementedError(
            f"{type(self).__name__} does not expose a distribution function")

    def score_shape(self) -> ScoreShape:
        raise NotImplementedError

    def score_inverse(self, s: float, a: float) -> ScoreInverse:
        raise ScoreNotInvertible(f"{type(self).__name__} score is not monotone")

    # -- derived ---------------------------------------------------------
    def density(self, y, a: float):
        self.check_action(a)
        self._check_support(y, a)
        return np.exp(self.log_density(_as_array(y), a))

    def density_derivs(self, y, a: float):
        """(f_a, f_aa) in closed form."""
        self.check_action(a)
        self._check_support(y, a)
        y = _as_array(y)
        f = np.exp(self.log_density(y, a))
        s = self.score(y, a)
        sa = self.score_action_slope(y, a)
        return s * f, (sa + s * s) * f

    def _check_support(self, y, a: float) -> None:
        y = _as_array(y)
        sup = self.support(a)
        bad = (y < sup.lo - 1e-12) | (y > sup.hi + 1e-12)
        if sup.discrete:
            frac = (y - sup.lo) / sup.step
            bad |= np.abs(frac - np.round(frac)) > 1e-9
        if np.any(bad):
            raise OutOfSupport(
                f"outcome outside support of {type(self).__name__} at a={a}")

    def panel_hints(self, a: float):
        """Interior quadrature panel edges for heavy-tailed supports.

        Nested quantile intervals concentrate panel edges where the mass
        is, which keeps composite quadrature honest when the truncation
        window is orders of magnitude wider than the central mass (the
        low-nu Student-t case). Discrete supports need no hints.
        """
        if self.support(a).discrete:
            return ()
        pts = []
        for m in _HINT_MASSES:
            b = self.quantile_bounds(a, m)
            pts.extend((b.lo, b.hi))
        return tuple(sorted(pts))

    def _continuous_bounds(self, lo, hi, a):
        pad = _PAD * 0.5 * (hi - lo)
        sup = self.support(a)
        return Interval(max(lo - pad, sup.lo), min(hi + pad, sup.hi))

    def _lattice_bounds(self, lo, hi, a, extra=3):
        sup = self.support(a)
        lo = max(lo - extra, sup.lo)
        hi = min(hi + extra, sup.hi)
        return Interval(np.floor(lo), np.ceil(hi) if np.isfinite(hi) else hi,
                        discrete=True, step=sup.step)


class Gaussian(OutputDistribution):
    """Output is N(a, sigma^2); score (y - a) / sigma^2."""

    def __init__(self, sigma: float):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)

    def support(self, a):
        return Interval(-np.inf, np.inf)

    def log_density(self, y, a):
        z = (y - a) / self.sigma
        return -0.5 * z * z - np.log(self.sigma) - 0.5 * _LOG_2PI

    def score(self, y, a):
        return (_as_array(y) - a) / self.sigma**2

    def score_action_slope(self, y, a):
        return np.full_like(_as_array(y), -1.0 / self.sigma**2)

    def mean(self, a):
        return float(a)

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        z = stats.norm.ppf(1.0 - eps)
        return self._continuous_bounds(a - z * self.sigma, a + z * self.sigma, a)

    def quantile(self, p, a):
        return a + self.sigma * stats.norm.ppf(p)

    def cdf(self, y, a):
        return stats.norm.cdf((_as_array(y) - a) / self.sigma)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=True, unbounded_above=True)

    def score_inverse(self, s, a):
        return ScoreInverse(float(a + self.sigma**2 * s), True)


class LogNormal(OutputDistribution):
    """log(y) is N(a, sigma^2); score (log y - a) / sigma^2."""

    def __init__(self, sigma: float):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)

    def support(self, a):
        return Interval(0.0, np.inf)

    def log_density(self, y, a):
        y = _as_array(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(y) - a) / self.sigma
            return -np.log(y) - 0.5 * z * z - np.log(self.sigma) - 0.5 * _LOG_2PI

    def score(self, y, a):
        with np.errstate(divide="ignore"):
            return (np.log(_as_array(y)) - a) / self.sigma**2

    def score_action_slope(self, y, a):
        return np.full_like(_as_array(y), -1.0 / self.sigma**2)

    def mean(self, a):
        return float(np.exp(a + 0.5 * self.sigma**2))

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        z = stats.norm.ppf(1.0 - eps)
        lo = np.exp(a - z * self.sigma)
        hi = np.exp(a + z * self.sigma)
        return self._continuous_bounds(lo, hi, a)

    def quantile(self, p, a):
        return np.exp(a + self.sigma * stats.norm.ppf(p))

    def cdf(self, y, a):
        return stats.norm.cdf((np.log(_as_array(y)) - a) / self.sigma)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=True, unbounded_above=True)

    def score_inverse(self, s, a):
        return ScoreInverse(float(np.exp(a + self.sigma**2 * s)), True)


class Poisson(OutputDistribution):
    """Poisson with mean a on {0, 1, ...}; score (y - a) / a."""

    action_lo = 0.0

    def support(self, a):
        return Interval(0.0, np.inf, discrete=True, step=1.0)

    def log_density(self, y, a):
        y = _as_array(y)
        return y * np.log(a) - a - special.gammaln(y + 1.0)

    def score(self, y, a):
        return (_as_array(y) - a) / a

    def score_action_slope(self, y, a):
        return -_as_array(y) / a**2

    def mean(self, a):
        return float(a)

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        lo = stats.poisson.ppf(eps, a)
        hi = stats.poisson.ppf(1.0 - eps, a)
        return self._lattice_bounds(lo, hi, a)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=False, unbounded_above=True)

    def score_inverse(self, s, a):
        return _discrete_score_inverse(self, s, a, a * (1.0 + s))


class Exponential(OutputDistribution):
    """Exponential with mean a on [0, inf); score (y - a) / a^2."""

    action_lo = 0.0

    def support(self, a):
        return Interval(0.0, np.inf)

    def log_density(self, y, a):
        return -np.log(a) - _as_array(y) / a

    def score(self, y, a):
        return (_as_array(y) - a) / a**2

    def score_action_slope(self, y, a):
        return 1.0 / a**2 - 2.0 * _as_array(y) / a**3

    def mean(self, a):
        return float(a)

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        return self._continuous_bounds(0.0, stats.expon.ppf(1.0 - eps, scale=a), a)

    def quantile(self, p, a):
        return stats.expon.ppf(p, scale=a)

    def cdf(self, y, a):
        return stats.expon.cdf(_as_array(y), scale=a)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=False, unbounded_above=True)

    def score_inverse(self, s, a):
        y = a + a**2 * s
        if y <= 0.0:
            raise ScoreOutOfRange("below")
        return ScoreInverse(float(y), True)


class Bernoulli(OutputDistribution):
    """Bernoulli(a) on {0, 1}; score (y - a) / (a - a^2)."""

    def __init__(self, boundary_eps: float = 1e-9):
        self.action_lo = boundary_eps
        self.action_hi = 1.0 - boundary_eps

    def support(self, a):
        return Interval(0.0, 1.0, discrete=True, step=1.0)

    def log_density(self, y, a):
        y = _as_array(y)
        return y * np.log(a) + (1.0 - y) * np.log1p(-a)

    def score(self, y, a):
        return (_as_array(y) - a) / (a - a * a)

    def score_action_slope(self, y, a):
        d = a - a * a
        return (-d - (_as_array(y) - a) * (1.0 - 2.0 * a)) / d**2

    def mean(self, a):
        return float(a)

    def quantile_bounds(self, a, mass):
        return Interval(0.0, 1.0, discrete=True, step=1.0)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=False, unbounded_above=False)

    def score_inverse(self, s, a):
        return _discrete_score_inverse(self, s, a, a + s * (a - a * a))


class Geometric(OutputDistribution):
    """Geometric with mean a on {1, 2, ...}; score (y - a) / (a^2 - a)."""

    def __init__(self, boundary_eps: float = 1e-9):
        self.action_lo = 1.0 + boundary_eps

    def support(self, a):
        return Interval(1.0, np.inf, discrete=True, step=1.0)

    def log_density(self, y, a):
        y = _as_array(y)
        return (y - 1.0) * np.log1p(-1.0 / a) - np.log(a)

    def score(self, y, a):
        return (_as_array(y) - a) / (a * a - a)

    def score_action_slope(self, y, a):
        d = a * a - a
        return (-d - (_as_array(y) - a) * (2.0 * a - 1.0)) / d**2

    def mean(self, a):
        return float(a)

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        hi = stats.geom.ppf(1.0 - eps, 1.0 / a)
        return self._lattice_bounds(1.0, hi, a)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=False, unbounded_above=True)

    def score_inverse(self, s, a):
        return _discrete_score_inverse(self, s, a, a + s * (a * a - a))


class Binomial(OutputDistribution):
    """Binomial(n, a) on {0, ..., n}; score (y - na) / (a - a^2)."""

    def __init__(self, n: int, boundary_eps: float = 1e-9):
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise ValueError("binomial n must be a positive integer")
        self.n = int(n)
        self.action_lo = boundary_eps
        self.action_hi = 1.0 - boundary_eps

    def support(self, a):
        return Interval(0.0, float(self.n), discrete=True, step=1.0)

    def log_density(self, y, a):
        y = _as_array(y)
        return (special.gammaln(self.n + 1.0) - special.gammaln(y + 1.0)
                - special.gammaln(self.n - y + 1.0)
                + y * np.log(a) + (self.n - y) * np.log1p(-a))

    def score(self, y, a):
        return (_as_array(y) - self.n * a) / (a - a * a)

    def score_action_slope(self, y, a):
        d = a - a * a
        return (-self.n * d - (_as_array(y) - self.n * a) * (1.0 - 2.0 * a)) / d**2

    def mean(self, a):
        return float(self.n * a)

    def quantile_bounds(self, a, mass):
        return Interval(0.0, float(self.n), discrete=True, step=1.0)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=False, unbounded_above=False)

    def score_inverse(self, s, a):
        return _discrete_score_inverse(self, s, a, self.n * a + s * (a - a * a))


class Gamma(OutputDistribution):
    """Gamma with shape n and scale a on (0, inf); score (y - na) / a^2."""

    action_lo = 0.0

    def __init__(self, n: float):
        if not n > 0:
            raise ValueError("gamma shape n must be positive")
        self.n = float(n)

    def support(self, a):
        return Interval(0.0, np.inf)

    def log_density(self, y, a):
        y = _as_array(y)
        with np.errstate(divide="ignore"):
            return ((self.n - 1.0) * np.log(y) - y / a
                    - special.gammaln(self.n) - self.n * np.log(a))

    def score(self, y, a):
        return (_as_array(y) - self.n * a) / a**2

    def score_action_slope(self, y, a):
        return self.n / a**2 - 2.0 * _as_array(y) / a**3

    def mean(self, a):
        return float(self.n * a)

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        lo = stats.gamma.ppf(eps, self.n, scale=a)
        hi = stats.gamma.ppf(1.0 - eps, self.n, scale=a)
        return self._continuous_bounds(lo, hi, a)

    def quantile(self, p, a):
        return stats.gamma.ppf(p, self.n, scale=a)

    def cdf(self, y, a):
        return stats.gamma.cdf(_as_array(y), self.n, scale=a)

    def score_shape(self):
        return ScoreShape(monotone=True, unbounded_below=False, unbounded_above=True)

    def score_inverse(self, s, a):
        y = self.n * a + a**2 * s
        if y <= 0.0:
            raise ScoreOutOfRange("below")
        return ScoreInverse(float(y), True)


class StudentT(OutputDistribution):
    """Location Student-t with mean a, scale sigma, tail parameter nu.

    The score (nu+1)(y-a) / (nu sigma^2 + (y-a)^2) approaches zero in both
    tails, so it is not monotone and the score inverse is undefined. This
    is the canonical case where global deviations bind.
    """

    def __init__(self, sigma: float, nu: float):
        if not sigma > 0 or not nu > 0:
            raise ValueError("sigma and nu must be positive")
        self.sigma = float(sigma)
        self.nu = float(nu)
        self._log_norm = (special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu)
                          - 0.5 * np.log(np.pi * nu) - np.log(sigma))

    def support(self, a):
        return Interval(-np.inf, np.inf)

    def log_density(self, y, a):
        r = (_as_array(y) - a) / self.sigma
        return self._log_norm - 0.5 * (self.nu + 1.0) * np.log1p(r * r / self.nu)

    def score(self, y, a):
        r = _as_array(y) - a
        return (self.nu + 1.0) * r / (self.nu * self.sigma**2 + r * r)

    def score_action_slope(self, y, a):
        r = _as_array(y) - a
        d = self.nu * self.sigma**2 + r * r
        return (self.nu + 1.0) * (r * r - self.nu * self.sigma**2) / d**2

    def mean(self, a):
        if self.nu <= 1.0:
            raise ValueError("Student-t mean undefined for nu <= 1")
        return float(a)

    def quantile_bounds(self, a, mass):
        eps = (1.0 - mass) * _TAIL_SPLIT
        z = stats.t.ppf(1.0 - eps, self.nu)
        return self._continuous_bounds(a - z * self.sigma, a + z * self.sigma, a)

    def quantile(self, p, a):
        return a + self.sigma * stats.t.ppf(p, self.nu)

    def cdf(self, y, a):
        return stats.t.cdf((_as_array(y) - a) / self.sigma, self.nu)

    def score_shape(self):
        return ScoreShape(monotone=False, unbounded_below=False, unbounded_above=False)


class LocationFamily(OutputDistribution):
    """y = a + X with X ~ base pdf h; score -h'(y-a) / h(y-a).

    The base density and its first two derivatives are user callables.
    Set ``monotone_score=True`` only if -h'/h is increasing (e.g. for
    log-concave bases); the score inverse is then found numerically.
    """

    def __init__(self, base_pdf: Callable, base_dpdf: Callable, base_d2pdf: Callable,
                 x_mean: float, x_quantile: Callable[[float], tuple],
                 monotone_score: bool = False):
        self.h = base_pdf
        self.dh = base_dpdf
        self.d2h = base_d2pdf
        self.x_mean = float(x_mean)
        self.x_quantile = x_quantile
        self.monotone_score = bool(monotone_score)

    def support(self, a):
        return Interval(-np.inf, np.inf)

    def log_density(self, y, a):
        return np.log(self.h(_as_array(y) - a))

    def score(self, y, a):
        x = _as_array(y) - a
        return -self.dh(x) / self.h(x)

    def score_action_slope(self, y, a):
        x = _as_array(y) - a
        h, dh, d2h = self.h(x), self.dh(x), self.d2h(x)
        return (d2h * h - dh * dh) / (h * h)

    def mean(self, a):
        return float(a + self.x_mean)

    def quantile_bounds(self, a, mass):
        lo, hi = self.x_quantile(mass)
        return self._continuous_bounds(a + lo, a + hi, a)

    def quantile(self, p, a):
        return a + _quantile_from_bounds(self.x_quantile, p)

    def score_shape(self):
        return ScoreShape(monotone=self.monotone_score,
                          unbounded_below=self.monotone_score,
                          unbounded_above=self.monotone_score)

    def score_inverse(self, s, a):
        if not self.monotone_score:
            raise ScoreNotInvertible("location family not declared monotone")
        from .numerics import find_root_monotone
        y = find_root_monotone(lambda yy: float(self.score(yy, a)) - s, a, +1)
        return ScoreInverse(float(y), True)


class ScaleFamily(OutputDistribution):
    """y = a X with X ~ base pdf h on (0, inf); density h(y/a)/a."""

    action_lo = 0.0

    def __init__(self, base_pdf: Callable, base_dpdf: Callable, base_d2pdf: Callable,
                 x_mean: float, x_quantile: Callable[[float], tuple],
                 monotone_score: bool = False):
        self.h = base_pdf
        self.dh = base_dpdf
        self.d2h = base_d2pdf
        self.x_mean = float(x_mean)
        self.x_quantile = x_quantile
        self.monotone_score = bool(monotone_score)

    def support(self, a):
        return Interval(0.0, np.inf)

    def log_density(self, y, a):
        return np.log(self.h(_as_array(y) / a)) - np.log(a)

    def score(self, y, a):
        y = _as_array(y)
        t = y / a
        return -1.0 / a - (y / a**2) * self.dh(t) / self.h(t)

    def score_action_slope(self, y, a):
        y = _as_array(y)
        t = y / a
        h, dh, d2h = self.h(t), self.dh(t), self.d2h(t)
        phi = dh / h
        dphi = (d2h * h - dh * dh) / (h * h)
        return 1.0 / a**2 + (2.0 * y / a**3) * phi + (y * y / a**4) * dphi

    def mean(self, a):
        return float(a * self.x_mean)

    def quantile_bounds(self, a, mass):
        lo, hi = self.x_quantile(mass)
        return self._continuous_bounds(a * lo, a * hi, a)

    def quantile(self, p, a):
        return a * _quantile_from_bounds(self.x_quantile, p)

    def score_shape(self):
        return ScoreShape(monotone=self.monotone_score,
                          unbounded_below=False,
                          unbounded_above=self.monotone_score)

    def score_inverse(self, s, a):
        if not self.monotone_score:
            raise ScoreNotInvertible("scale family not declared monotone")
        from .numerics import find_root_monotone
        y = find_root_monotone(lambda yy: float(self.score(yy, a)) - s,
                               a * max(self.x_mean, 1e-6), +1)
        return ScoreInverse(float(y), True)


def _quantile_from_bounds(x_quantile, p):
    """Approximate base quantile from the symmetric-bounds callable.

    x_quantile(mass) covers all but (1 - mass) * _TAIL_SPLIT per side, so
    the p-th quantile sits at the matching bound of mass 1 - p / _TAIL_SPLIT
    (lower bound for p < 1/2, upper for p > 1/2).
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("quantile probability must be in (0, 1)")
    eps = min(p, 1.0 - p)
    lo, hi = x_quantile(1.0 - eps / _TAIL_SPLIT)
    return lo if p <= 0.5 else hi


def _discrete_score_inverse(dist, s, a, y_cont):
    """Largest lattice point with S(y) <= s, with an exactness flag."""
    sup = dist.support(a)
    if y_cont < sup.lo - 1e-12:
        raise ScoreOutOfRange("below")
    if np.isfinite(sup.hi) and y_cont > sup.hi + 1e-12:
        raise ScoreOutOfRange("above")
    y = sup.lo + np.floor((y_cont - sup.lo) / sup.step + 1e-9) * sup.step
    y = min(max(y, sup.lo), sup.hi if np.isfinite(sup.hi) else y)
    exact = abs(float(dist.score(y, a)) - s) <= 1e-9 * (1.0 + abs(s))
    return ScoreInverse(float(y), bool(exact))


FAMILIES = {
    "gaussian": Gaussian,
    "lognormal": LogNormal,
    "poisson": Poisson,
    "exponential": Exponential,
    "bernoulli": Bernoulli,
    "geometric": Geometric,
    "binomial": Binomial,
    "gamma": Gamma,
    "student_t": StudentT,
}

_FAMILY_PARAMS = {
    "gaussian": {"sigma"},
    "lognormal": {"sigma"},
    "poisson": set(),
    "exponential": set(),
    "bernoulli": {"boundary_eps"},
    "geometric": {"boundary_eps"},
    "binomial": {"n", "boundary_eps"},
    "gamma": {"n"},
    "student_t": {"sigma", "nu"},
}


def from_config(cfg: dict) -> OutputDistribution:
    """Build a distribution from {"family": name, **params}."""
    from .errors import ValidationError

    if "family" not in cfg:
        raise ValidationError("distribution config missing 'family'")
    family = str(cfg["family"]).lower().replace("-", "_")
    if family not in FAMILIES:
        raise ValidationError(f"unknown distribution family {cfg['family']!r}")
    params = {k: v for k, v in cfg.items() if k != "family"}
    allowed = _FAMILY_PARAMS[family]
    unknown = set(params) - allowed
    if unknown:
        raise ValidationError(
            f"unknown parameters {sorted(unknown)} for family {family!r}")
    try:
        return FAMILIES[family](**params)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc
