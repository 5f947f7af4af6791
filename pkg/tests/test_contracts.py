import numpy as np
import pytest
from scipy import stats

from mhsolver.contracts import CanonicalContract
from mhsolver.problem import problem_from_dict

from conftest import central_diff, gaussian_log_problem, student_t_problem


@pytest.fixture(scope="module")
def gl():
    return gaussian_log_problem()


@pytest.fixture(scope="module")
def option_contract(gl):
    # lam above the kink, mu sized so the zero-pay threshold lands at y = 75
    return CanonicalContract(lam=60.0, mu=1000.0, a0=100.0, problem=gl)


class TestPointwise:
    def test_utility_at_center(self, option_contract):
        assert abs(option_contract.utility_at(100.0) - np.log(60.0)) <= 1e-12

    def test_utility_floored_at_threshold(self, option_contract):
        # S(75) = -0.01 puts the link argument exactly at the kink
        assert abs(option_contract.utility_at(75.0) - np.log(50.0)) <= 1e-12

    def test_wages(self, option_contract):
        assert option_contract.wage_at(75.0) == 0.0
        assert abs(option_contract.wage_at(100.0) - 10.0) <= 1e-12
        assert abs(option_contract.wage_at(150.0) - 30.0) <= 1e-12

    def test_wage_monotone_for_monotone_score(self, option_contract):
        y = np.linspace(-100.0, 300.0, 401)
        w = option_contract.wage_at(y)
        assert np.all(np.diff(w) >= 0.0)

    def test_deviation_term_matches_manual(self, gl):
        c = CanonicalContract(lam=60.0, mu=1000.0, a0=100.0, problem=gl,
                              deviations=((80.0, 5.0),))
        d = gl.distribution
        y = 130.0
        ratio = float(d.density(y, 80.0)) / float(d.density(y, 100.0))
        want = 60.0 + 1000.0 * float(d.score(y, 100.0)) + 5.0 * (1.0 - ratio)
        assert abs(float(c.link_arg(y)) - want) <= 1e-10 * (1.0 + abs(want))

    def test_ratio_stable_in_far_tail(self, gl):
        # both densities underflow at y = 800; the log-space ratio must not
        c = CanonicalContract(lam=60.0, mu=1000.0, a0=100.0, problem=gl,
                              deviations=((80.0, 5.0),))
        assert np.isfinite(float(c.link_arg(800.0)))


class TestValidation:
    def test_negative_lambda(self, gl):
        with pytest.raises(ValueError):
            CanonicalContract(lam=-1.0, mu=10.0, a0=100.0, problem=gl)

    def test_negative_deviation_multiplier(self, gl):
        with pytest.raises(ValueError):
            CanonicalContract(lam=1.0, mu=10.0, a0=100.0, problem=gl,
                              deviations=((80.0, -1.0),))

    def test_deviation_at_a0(self, gl):
        with pytest.raises(ValueError):
            CanonicalContract(lam=1.0, mu=10.0, a0=100.0, problem=gl,
                              deviations=((100.0, 1.0),))


class TestIntegrated:
    def test_full_insurance(self, gl):
        c = CanonicalContract(lam=80.0, mu=0.0, a0=100.0, problem=gl)
        u = gl.utility
        want_u = float(u.link_g(80.0)) - float(gl.cost.cost(90.0))
        assert abs(c.agent_utility(90.0) - want_u) <= 1e-10
        assert abs(c.expected_wage(100.0) - 30.0) <= 1e-8

    def test_marginal_matches_finite_difference(self, option_contract):
        for a in (90.0, 100.0, 115.0):
            fd = central_diff(option_contract.agent_utility, a, 1e-4)
            assert abs(option_contract.agent_marginal_utility(a) - fd) <= 1e-6

    def test_derivs_pair_consistent(self, option_contract):
        u_a, u_aa = option_contract.agent_utility_derivs(100.0)
        assert abs(u_a - option_contract.agent_marginal_utility(100.0)) <= 1e-12
        fdd = central_diff(option_contract.agent_marginal_utility, 100.0, 1e-4)
        assert abs(u_aa - fdd) <= 1e-6

    def test_expected_wage_nonnegative(self, option_contract):
        for a in (60.0, 100.0, 150.0):
            assert option_contract.expected_wage(a) >= 0.0

    def test_discrete_outcome_contract(self):
        p = problem_from_dict({
            "distribution": {"family": "poisson"},
            "utility": {"family": "log", "w0": 50.0},
            "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
            "a0": 100.0,
            "action_interval": [1.0, 300.0],
            "reservation_utility": 4.5,
        })
        c = CanonicalContract(lam=60.0, mu=500.0, a0=100.0, problem=p)
        u = c.agent_utility(100.0)
        # brute-force summation over a generous lattice as oracle
        y = np.arange(0.0, 400.0)
        f = stats.poisson.pmf(y, 100.0)
        v = p.utility.link_g(60.0 + 500.0 * (y / 100.0 - 1.0))
        want = float(np.sum(v * f)) - float(p.cost.cost(100.0))
        assert abs(u - want) <= 1e-9


class TestDeltaG:
    def test_rejects_deviation_contracts(self, gl):
        c = CanonicalContract(lam=1.0, mu=10.0, a0=100.0, problem=gl,
                              deviations=((80.0, 1.0),))
        with pytest.raises(ValueError):
            c.delta_g(100.0)

    def test_finite_at_zero_score(self, option_contract):
        assert np.isfinite(float(option_contract.delta_g(100.0)))

    def test_limit_above_kink(self, gl):
        c = CanonicalContract(lam=60.0, mu=1000.0, a0=100.0, problem=gl)
        # g'(60) = 1/60 for the log link
        assert abs(float(c.delta_g(100.0)) - 1.0 / 60.0) <= 1e-12

    def test_limit_below_kink(self, gl):
        c = CanonicalContract(lam=0.0, mu=1000.0, a0=100.0, problem=gl)
        assert float(c.delta_g(100.0)) == 0.0

    @pytest.mark.parametrize("lam", [0.0, 60.0])
    def test_utility_agreement(self, gl, lam):
        c = CanonicalContract(lam=lam, mu=1000.0, a0=100.0, problem=gl)
        for a in (85.0, 100.0, 120.0):
            direct = c.agent_utility(a)
            other = c.agent_utility_deltag(a)
            assert abs(direct - other) <= 1e-8 * (1.0 + abs(direct))

    @pytest.mark.parametrize("lam", [0.0, 60.0])
    def test_deriv_agreement(self, gl, lam):
        c = CanonicalContract(lam=lam, mu=1000.0, a0=100.0, problem=gl)
        ua1, uaa1 = c.agent_utility_derivs(100.0)
        ua2, uaa2 = c.agent_utility_derivs_deltag(100.0)
        assert abs(ua1 - ua2) <= 1e-8 * (1.0 + abs(ua1))
        assert abs(uaa1 - uaa2) <= 1e-8 * (1.0 + abs(uaa1))


class TestThreshold:
    def test_gaussian_threshold(self, option_contract):
        rep = option_contract.threshold_report()
        assert abs(rep.threshold_score - (-0.01)) <= 1e-15
        assert abs(rep.threshold_outcome - 75.0) <= 1e-9
        assert abs(rep.zero_pay_prob - stats.norm.cdf(-0.5)) <= 1e-9

    def test_always_paying_contract(self):
        # exponential score is bounded below at -1/a; a deep threshold
        # falls off the image and the contract never hits the floor
        p = problem_from_dict({
            "distribution": {"family": "exponential"},
            "utility": {"family": "log", "w0": 50.0},
            "cost": {"kappa": 1.0 / 30000.0, "power": 2.0},
            "a0": 100.0,
            "action_interval": [1.0, 300.0],
            "reservation_utility": 4.0,
        })
        c = CanonicalContract(lam=55.0, mu=100.0, a0=100.0, problem=p)
        rep = c.threshold_report()
        assert rep.threshold_outcome == -np.inf
        assert rep.zero_pay_prob == 0.0

    def test_non_invertible_score_integrates_directly(self):
        p = student_t_problem()
        c = CanonicalContract(lam=60.0, mu=1000.0, a0=100.0, problem=p)
        rep = c.threshold_report()
        assert np.isnan(rep.threshold_outcome)
        # oracle: dense brute-force sum of the zero-wage probability
        w = p.outcome_window(100.0)
        y = np.linspace(w.lo, w.hi, 2_000_001)
        wage = c.wage_at(y)
        f = p.distribution.density(y, 100.0)
        brute = float(np.trapezoid(np.where(wage <= 0.0, f, 0.0), y))
        assert abs(rep.zero_pay_prob - brute) <= 1e-4

    def test_requires_mu_positive(self, gl):
        c = CanonicalContract(lam=60.0, mu=0.0, a0=100.0, problem=gl)
        with pytest.raises(ValueError):
            c.threshold_report()


class TestSerialization:
    def test_round_trip(self, gl):
        c = CanonicalContract(lam=60.0, mu=1000.0, a0=100.0, problem=gl,
                              deviations=((80.0, 5.0), (130.0, 2.0)))
        back = CanonicalContract.from_dict(c.to_dict(), gl)
        assert back == c
