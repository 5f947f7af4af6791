"""Shared numerical kernels.

Four primitives: adaptive integration over continuous or lattice supports,
bracketed monotone root-finding, scalar maximization on an interval, and
box-constrained multivariate ascent. All routines are pure functions of
their inputs, so independent solve jobs can call them concurrently.

Integrands passed to :func:`integrate` and :func:`maximize_scalar` must
accept numpy arrays (everything downstream is vectorized; this is what
keeps solver runtimes in the millisecond range).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import NoBracket, NoConvergence, NonFinite

__all__ = [
    "Interval",
    "Tolerances",
    "integrate",
    "find_root_monotone",
    "maximize_scalar",
    "maximize_box",
]


@dataclass(frozen=True)
class Interval:
    """Support of an output distribution: a real interval or a lattice."""

    lo: float
    hi: float
    discrete: bool = False
    step: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if self.discrete:
            if not np.isfinite(self.lo):
                raise ValueError("discrete support needs a finite lower bound")
            if self.step <= 0:
                raise ValueError("lattice step must be positive")
            if np.isfinite(self.hi):
                n = (self.hi - self.lo) / self.step
                if abs(n - round(n)) > 1e-9 or round(n) < 1:
                    raise ValueError("lattice endpoints not step-commensurate")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def clip(self, lo: float, hi: float) -> "Interval":
        """Intersect with [lo, hi], snapping to the lattice if discrete."""
        new_lo = max(self.lo, lo)
        new_hi = min(self.hi, hi)
        if self.discrete:
            new_lo = self.lo + np.ceil((new_lo - self.lo) / self.step - 1e-12) * self.step
            new_hi = self.lo + np.floor((new_hi - self.lo) / self.step + 1e-12) * self.step
        return Interval(new_lo, new_hi, self.discrete, self.step)

    def lattice(self) -> np.ndarray:
        if not self.discrete:
            raise ValueError("lattice() on a continuous interval")
        if not np.isfinite(self.hi):
            raise ValueError("lattice() needs a finite upper bound")
        n = int(round((self.hi - self.lo) / self.step)) + 1
        return self.lo + self.step * np.arange(n)


@dataclass(frozen=True)
class Tolerances:
    abs_int: float = 1e-10
    rel_int: float = 1e-10
    root_tol: float = 1e-9
    grad_tol: float = 1e-8
    deviation_tol: float = 1e-6
    kkt_tol: float = 1e-6

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be strictly positive: {value}")


DEFAULT_TOL = Tolerances()

# Composite Gauss-Legendre rule used by the continuous branch of integrate.
_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _gl_panels(fn, lo, hi, n_panels, breakpoints):
    inner = sorted(b for b in set(breakpoints) if lo < b < hi)
    if inner:
        # Subdivide every breakpoint segment equally so the doubling loop
        # refines inside narrow segments too, not just the global span.
        seg = np.concatenate([[lo], inner, [hi]])
        k = max(2, int(np.ceil(n_panels / (len(seg) - 1))))
        edges = np.unique(np.concatenate(
            [np.linspace(a, b, k + 1) for a, b in zip(seg[:-1], seg[1:])]))
    else:
        edges = np.linspace(lo, hi, n_panels + 1)
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    # nodes: (n_panels, order)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("integrand returned non-finite values")
    return float(np.sum(vals @ _GL_WEIGHTS * half))


def integrate(fn, support: Interval, tol: Tolerances = DEFAULT_TOL,
              breakpoints=()) -> float:
    """Integral of ``fn`` over ``support`` (sum over the lattice if discrete).

    ``fn`` must be vectorized. ``breakpoints`` are interior points where the
    integrand has a kink; panels are split there so the composite rule keeps
    its accuracy. Infinite continuous endpoints must be truncated upstream
    (density-weighted integrands go through quantile_bounds); infinite
    lattice upper ends are summed with a tail-decay stopping rule.
    """
    if support.discrete:
        return _integrate_lattice(fn, support, tol)
    lo, hi = support.lo, support.hi
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("continuous integration needs finite (truncated) bounds")
    n = 16
    prev = _gl_panels(fn, lo, hi, n, breakpoints)
    for _ in range(8):
        n *= 2
        cur = _gl_panels(fn, lo, hi, n, breakpoints)
        if abs(cur - prev) <= max(tol.abs_int, tol.rel_int * abs(cur)):
            return cur
        prev = cur
    raise NoConvergence(f"integration did not settle after {n} panels")


def _integrate_lattice(fn, support, tol):
    if np.isfinite(support.hi):
        vals = np.asarray(fn(support.lattice()), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonFinite("lattice summand returned non-finite values")
        return float(np.sum(vals))
    # Infinite upper end: chunked summation, stopping once a full chunk in
    # the decreasing right tail is provably below the absolute tolerance.
    total = 0.0
    chunk = 256
    start = support.lo
    peak = 0.0
    for _ in range(4000):
        y = start + support.step * np.arange(chunk)
        vals = np.asarray(fn(y), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonFinite("lattice summand returned non-finite values")
        total += float(np.sum(vals))
        m = float(np.max(np.abs(vals)))
        peak = max(peak, m)
        decreasing = abs(vals[-1]) <= abs(vals[0])
        if peak > 0 and decreasing and m < tol.abs_int * 1e-2:
            return total
        start = y[-1] + support.step
    raise NoConvergence("lattice tail did not fall below tolerance")


def find_root_monotone(fn, seed: float, direction: int,
                       tol: Tolerances = DEFAULT_TOL) -> float:
    """Root of a monotone scalar function, bracketing from ``seed``.

    ``direction`` is +1 for nondecreasing fn, -1 for nonincreasing. The
    bracket is found by geometric expansion (factor 2, at most 200
    doublings); candidates where fn is undefined (raises or returns
    non-finite) trigger a geometric contraction toward zero instead, which
    handles functions only defined on a half-line.
    """
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")

    def f(x):
        return direction * fn(x)

    def probe(x):
        try:
            v = f(x)
        except (ArithmeticError, ValueError):
            return None
        return v if np.isfinite(v) else None

    f0 = probe(seed)
    if f0 is None:
        raise NoBracket(f"fn undefined at seed {seed}")
    if f0 == 0.0:
        return seed
    # f is nondecreasing: walk right if f(seed) < 0, else left.
    go_right = f0 < 0
    step = max(1.0, abs(seed))
    x_prev, f_prev = seed, f0
    for _ in range(200):
        x = x_prev + step if go_right else x_prev - step
        fx = probe(x)
        if fx is None:
            # Likely a domain edge between x_prev and x: contract toward it.
            x, fx = _contract(probe, x_prev, x)
            if fx is None:
                raise NoBracket("expansion left the function's domain")
        if fx == 0.0:
            return x
        if (fx > 0) != (f_prev > 0):
            lo, hi = (x_prev, x) if go_right else (x, x_prev)
            return _brent(f, lo, hi, tol)
        x_prev, f_prev = x, fx
        step *= 2.0
    raise NoBracket("no sign change within 200 doublings")


def _contract(probe, x_good, x_bad, max_halvings=80):
    """Bisect between a point in the domain and one outside it."""
    for _ in range(max_halvings):
        mid = 0.5 * (x_good + x_bad)
        fm = probe(mid)
        if fm is None:
            x_bad = mid
        else:
            return mid, fm
    return x_bad, None


def _brent(f, lo, hi, tol):
    root = optimize.brentq(f, lo, hi, xtol=tol.root_tol,
                           rtol=max(tol.root_tol, 4e-16), maxiter=200)
    return float(root)


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def maximize_scalar(fn, domain: Interval, n_grid: int,
                    tol: Tolerances = DEFAULT_TOL):
    """Grid scan then golden-section refinement; returns (argmax, max).

    ``fn`` must accept arrays for the grid pass; the refinement calls it
    with scalars.
    """
    if not (np.isfinite(domain.lo) and np.isfinite(domain.hi)):
        raise ValueError("maximize_scalar needs a bounded domain")
    xs = np.linspace(domain.lo, domain.hi, n_grid)
    vals = np.asarray(fn(xs), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("objective returned non-finite values on the grid")
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, n_grid - 1)]
    if hi <= lo:
        return float(xs[i]), float(vals[i])
    x_ref, v_ref = _golden_max(fn, lo, hi, tol.root_tol * domain.width)
    if v_ref >= vals[i]:
        return x_ref, v_ref
    return float(xs[i]), float(vals[i])


def _golden_max(fn, lo, hi, xatol):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = float(fn(c))
    fd = float(fn(d))
    while (b - a) > max(xatol, 1e-15 * (abs(a) + abs(b))):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = float(fn(c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = float(fn(d))
    x = c if fc > fd else d
    return float(x), float(max(fc, fd))


def maximize_box(fn, grad, lower, init, tol: Tolerances = DEFAULT_TOL,
                 max_iter: int = 500) -> np.ndarray:
    """Box-constrained ascent via L-BFGS-B (memory 10, deterministic).

    ``lower`` holds per-coordinate lower bounds (-inf for free); upper
    bounds are unconstrained. Raises NoConvergence if the projected
    gradient inf-norm stays above grad_tol.
    """
    init = np.asarray(init, dtype=float)
    lower = np.asarray(lower, dtype=float)
    bounds = [(lo if np.isfinite(lo) else None, None) for lo in lower]

    res = optimize.minimize(
        lambda x: -float(fn(x)),
        np.maximum(init, lower),
        jac=lambda x: -np.asarray(grad(x), dtype=float),
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": max_iter, "maxcor": 10, "ftol": 1e-16,
                 "gtol": tol.grad_tol * 1e-2},
    )
    x = np.asarray(res.x, dtype=float)
    g = np.asarray(grad(x), dtype=float)
    # Projected gradient: at an active lower bound only ascent directions count.
    proj = np.where((x <= lower + 1e-12) & (g < 0), 0.0, g)
    if np.max(np.abs(proj)) > tol.grad_tol:
        raise NoConvergence(
            f"projected gradient norm {np.max(np.abs(proj)):.3e} > {tol.grad_tol}")
    return x
