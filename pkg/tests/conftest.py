"""Shared fixtures: the standard problem instances used across the suite."""

import numpy as np
import pytest

from mhsolver.problem import problem_from_dict
from mhsolver.relaxed import solve_relaxed


def gaussian_log_problem(u_bar=4.5, sigma=50.0, a0=100.0,
                         interval=(0.0, 300.0), **extra):
    cfg = {
        "distribution": {"family": "gaussian", "sigma": sigma},
        "utility": {"family": "log", "w0": 50.0},
        "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
        "a0": a0,
        "action_interval": list(interval),
        "reservation_utility": u_bar,
    }
    cfg.update(extra)
    return problem_from_dict(cfg)


def student_t_problem(u_bar=4.5):
    return problem_from_dict({
        "distribution": {"family": "student_t", "sigma": 20.0, "nu": 1.15},
        "utility": {"family": "log", "w0": 50.0},
        "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
        "a0": 100.0,
        "action_interval": [0.0, 300.0],
        "reservation_utility": u_bar,
    })


def exponential_log_problem(u_bar=4.0):
    return problem_from_dict({
        "distribution": {"family": "exponential"},
        "utility": {"family": "log", "w0": 50.0},
        "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
        "a0": 100.0,
        "action_interval": [1.0, 300.0],
        "reservation_utility": u_bar,
    })


def poisson_log_problem(u_bar=4.5):
    return problem_from_dict({
        "distribution": {"family": "poisson"},
        "utility": {"family": "log", "w0": 50.0},
        "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
        "a0": 100.0,
        "action_interval": [1.0, 300.0],
        "reservation_utility": u_bar,
    })


@pytest.fixture(scope="session")
def gl_problem():
    return gaussian_log_problem()


@pytest.fixture(scope="session")
def gl_relaxed(gl_problem):
    return solve_relaxed(gl_problem)


@pytest.fixture(scope="session")
def gl_low_problem():
    return gaussian_log_problem(u_bar=2.0)


@pytest.fixture(scope="session")
def gl_low_relaxed(gl_low_problem):
    return solve_relaxed(gl_low_problem)


def central_diff(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def second_diff(fn, x, h):
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)


def rel_err(got, want):
    return abs(got - want) / max(abs(want), 1e-300)
