"""Agent preferences: utility families, the link function, and effort cost.

Each utility family is a closed-form bundle (u, k = u^{-1}, k', k'^{-1});
nothing is inverted numerically because the link function sits inside
every dual evaluation. The link

    g(z) = k'^{-1}( max(1 / u'(0), z) )

maps a marginal dollar-cost-of-utility z to the utility level where that
marginal cost is attained, floored at u(0) by limited liability. The
kink location z_kink = 1 / u'(0) and u(0) are precomputed at
construction since the threshold diagnostics hinge on them.

All maps accept numpy arrays.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BelowLimitedLiability, ValidationError

__all__ = [
    "Utility",
    "LogUtility",
    "CRRAUtility",
    "CARAUtility",
    "CostSpec",
    "utility_from_config",
    "cost_from_config",
]


class Utility:
    """Base class. Subclasses set u0 = u(0), z_kink = 1/u'(0), u_sup."""

    family: str
    u0: float
    z_kink: float
    u_sup: float  # sup over payments of u(x); np.inf when unbounded above

    def u(self, x):
        raise NotImplementedError

    def k(self, v):
        """Compensation cost: the wage paying utility v (inverse of u)."""
        raise NotImplementedError

    def k_prime(self, v):
        raise NotImplementedError

    def k_prime_inv(self, z):
        """Inverse marginal cost; only valid for z >= z_kink."""
        raise NotImplementedError

    def g_prime(self, z):
        """d/dz k'^{-1}(z) for z > z_kink (slope of the link past the kink)."""
        raise NotImplementedError

    def link_g(self, z):
        return self.k_prime_inv(np.maximum(z, self.z_kink))

    def wage_of_marginal(self, z):
        """k(g(z)): nonnegative, zero exactly on z <= z_kink."""
        raise NotImplementedError

    def _check_ll(self, v):
        if np.any(np.asarray(v) < self.u0 - 1e-12 * (1.0 + abs(self.u0))):
            raise BelowLimitedLiability(
                f"utility below u(0) = {self.u0} not attainable with w >= 0")


class LogUtility(Utility):
    """u(x) = log(x + w0). Wage map (z - w0)^+: the option-contract kernel."""

    family = "log"

    def __init__(self, w0: float):
        if not w0 > 0:
            raise ValueError("log utility requires w0 > 0")
        self.w0 = float(w0)
        self.u0 = float(np.log(w0))
        self.z_kink = float(w0)
        self.u_sup = np.inf

    def u(self, x):
        return np.log(np.asarray(x) + self.w0)

    def k(self, v):
        self._check_ll(v)
        return np.exp(v) - self.w0

    def k_prime(self, v):
        self._check_ll(v)
        return np.exp(v)

    def k_prime_inv(self, z):
        return np.log(z)

    def g_prime(self, z):
        return 1.0 / z

    def wage_of_marginal(self, z):
        return np.maximum(np.asarray(z, dtype=float) - self.w0, 0.0)


class CRRAUtility(Utility):
    """u(x) = (x + w0)^{1-gamma} / (1-gamma), gamma > 0, gamma != 1."""

    family = "crra"

    def __init__(self, w0: float, gamma: float):
        if not w0 > 0:
            raise ValueError("CRRA requires w0 > 0")
        if not gamma > 0 or gamma == 1.0:
            raise ValueError("CRRA requires gamma > 0, gamma != 1 (use log for 1)")
        self.w0 = float(w0)
        self.gamma = float(gamma)
        self.u0 = float(w0 ** (1.0 - gamma) / (1.0 - gamma))
        self.z_kink = float(w0 ** gamma)
        self.u_sup = np.inf if gamma < 1.0 else 0.0
        # The limit z * d/dz k'^{-1}(z) = z^{(1-gamma)/gamma} / gamma must
        # stay finite as z -> inf; that holds only in the gamma >= 1 branch.
        if gamma < 1.0:
            warnings.warn(
                "CRRA with gamma < 1: z * g'(z) diverges, so the concavity "
                "machinery behind high-reservation-utility validity is not "
                "guaranteed; solvers still run", stacklevel=2)

    def u(self, x):
        return (np.asarray(x) + self.w0) ** (1.0 - self.gamma) / (1.0 - self.gamma)

    def k(self, v):
        self._check_ll(v)
        return ((1.0 - self.gamma) * np.asarray(v)) ** (1.0 / (1.0 - self.gamma)) - self.w0

    def k_prime(self, v):
        self._check_ll(v)
        return ((1.0 - self.gamma) * np.asarray(v)) ** (self.gamma / (1.0 - self.gamma))

    def k_prime_inv(self, z):
        return np.asarray(z) ** ((1.0 - self.gamma) / self.gamma) / (1.0 - self.gamma)

    def g_prime(self, z):
        return np.asarray(z) ** ((1.0 - 2.0 * self.gamma) / self.gamma) / self.gamma

    def wage_of_marginal(self, z):
        z = np.maximum(np.asarray(z, dtype=float), 0.0)
        return np.maximum(z ** (1.0 / self.gamma) - self.w0, 0.0)


class CARAUtility(Utility):
    """u(x) = -exp(-alpha (x + w0)) / alpha.

    Bounded above (u_sup = 0), so high reservation utilities can make the
    problem infeasible; the solvers report that rather than rejecting the
    family up front.
    """

    family = "cara"

    def __init__(self, w0: float, alpha: float):
        if not w0 > 0:
            raise ValueError("CARA requires w0 > 0")
        if not alpha > 0:
            raise ValueError("CARA requires alpha > 0")
        self.w0 = float(w0)
        self.alpha = float(alpha)
        self.u0 = float(-np.exp(-alpha * w0) / alpha)
        self.z_kink = float(np.exp(alpha * w0))
        self.u_sup = 0.0

    def u(self, x):
        return -np.exp(-self.alpha * (np.asarray(x) + self.w0)) / self.alpha

    def k(self, v):
        self._check_ll(v)
        return -self.w0 - np.log(-self.alpha * np.asarray(v)) / self.alpha

    def k_prime(self, v):
        self._check_ll(v)
        return -1.0 / (self.alpha * np.asarray(v))

    def k_prime_inv(self, z):
        return -1.0 / (self.alpha * np.asarray(z))

    def g_prime(self, z):
        return 1.0 / (self.alpha * np.asarray(z) ** 2)

    def wage_of_marginal(self, z):
        logz = np.log(np.maximum(np.asarray(z, dtype=float), 1.0))
        return np.maximum(logz - self.alpha * self.w0, 0.0) / self.alpha


@dataclass(frozen=True)
class CostSpec:
    """Effort cost c(a) = kappa * a^power; strictly convex with c'(0) = 0."""

    kappa: float
    power: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("cost kappa must be positive")
        if not self.power > 1:
            raise ValueError("cost power must exceed 1 (strict convexity)")

    def cost(self, a):
        return self.kappa * np.asarray(a, dtype=float) ** self.power

    def cost_d(self, a):
        return self.kappa * self.power * np.asarray(a, dtype=float) ** (self.power - 1.0)

    def cost_dd(self, a):
        p = self.power
        return self.kappa * p * (p - 1.0) * np.asarray(a, dtype=float) ** (p - 2.0)


_UTILITY_PARAMS = {
    "log": {"w0"},
    "crra": {"w0", "gamma"},
    "cara": {"w0", "alpha"},
}

_UTILITY_CLASSES = {
    "log": LogUtility,
    "crra": CRRAUtility,
    "cara": CARAUtility,
}


def utility_from_config(cfg: dict) -> Utility:
    if "family" not in cfg:
        raise ValidationError("utility config missing 'family'")
    family = str(cfg["family"]).lower()
    if family not in _UTILITY_CLASSES:
        raise ValidationError(f"unknown utility family {cfg['family']!r}")
    params = {k: v for k, v in cfg.items() if k != "family"}
    unknown = set(params) - _UTILITY_PARAMS[family]
    if unknown:
        raise ValidationError(
            f"unknown parameters {sorted(unknown)} for utility {family!r}")
    try:
        return _UTILITY_CLASSES[family](**params)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc


def cost_from_config(cfg: dict) -> CostSpec:
    unknown = set(cfg) - {"kappa", "power"}
    if unknown:
        raise ValidationError(f"unknown cost parameters {sorted(unknown)}")
    try:
        return CostSpec(kappa=float(cfg["kappa"]), power=float(cfg["power"]))
    except KeyError as exc:
        raise ValidationError(f"cost config missing {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
