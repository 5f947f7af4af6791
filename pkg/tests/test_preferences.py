import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mhsolver.errors import BelowLimitedLiability, ValidationError
from mhsolver.preferences import (
    CARAUtility,
    CostSpec,
    CRRAUtility,
    LogUtility,
    cost_from_config,
    utility_from_config,
)

UTILITIES = [
    LogUtility(w0=50.0),
    CRRAUtility(w0=1.0, gamma=2.0),
    CARAUtility(w0=2.0, alpha=1.0),
]


class TestTabulatedValues:
    def test_log_u_at_zero(self):
        u = LogUtility(w0=50.0)
        assert abs(u.u0 - np.log(50.0)) <= 1e-15
        assert u.u(0.0) == u.u0

    def test_log_kink_location(self):
        assert LogUtility(w0=50.0).z_kink == 50.0

    def test_log_link_below_kink_floors(self):
        u = LogUtility(w0=50.0)
        assert abs(u.link_g(25.0) - np.log(50.0)) <= 1e-15

    def test_log_link_above_kink(self):
        u = LogUtility(w0=50.0)
        assert abs(u.link_g(100.0) - np.log(100.0)) <= 1e-15

    def test_log_wage_of_marginal(self):
        u = LogUtility(w0=50.0)
        assert u.wage_of_marginal(25.0) == 0.0
        assert u.wage_of_marginal(50.0) == 0.0
        assert u.wage_of_marginal(60.0) == 10.0
        assert u.wage_of_marginal(80.0) == 30.0

    def test_crra_wage_of_marginal(self):
        u = CRRAUtility(w0=1.0, gamma=2.0)
        # z = 4 -> z^{1/gamma} - w0 = 2 - 1 = 1
        assert abs(u.wage_of_marginal(4.0) - 1.0) <= 1e-15

    def test_cara_link_value(self):
        u = CARAUtility(w0=2.0, alpha=1.0)
        assert abs(u.link_g(np.exp(2.0)) - (-np.exp(-2.0))) <= 1e-15

    def test_quadratic_cost_values(self):
        c = CostSpec(kappa=1.0 / 30000.0, power=2.0)
        assert abs(c.cost(100.0) - 1.0 / 3.0) <= 1e-15
        assert abs(c.cost_d(100.0) - 1.0 / 150.0) <= 1e-15
        assert abs(c.cost_dd(100.0) - 1.0 / 15000.0) <= 1e-18


class TestInverseStructure:
    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_k_inverts_u(self, u):
        for x in (0.0, 1.0, 10.0, 100.0):
            assert abs(float(u.k(u.u(x))) - x) <= 1e-10 * (1.0 + x)

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_k_prime_is_derivative(self, u):
        for x in (1.0, 3.0, 5.0):
            v = float(u.u(x))
            h = 1e-6 * abs(v)  # utilities near zero (CARA) need a scaled step
            fd = (float(u.k(v + h)) - float(u.k(v - h))) / (2 * h)
            assert abs(float(u.k_prime(v)) - fd) <= 1e-5 * (1.0 + abs(fd))

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_k_prime_inv_round_trip(self, u):
        for x in (0.5, 5.0, 50.0):
            v = float(u.u(x))
            assert abs(float(u.k_prime_inv(u.k_prime(v))) - v) \
                <= 1e-10 * (1.0 + abs(v))

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_g_prime_is_link_slope(self, u):
        h = 1e-6
        for z in (u.z_kink * 1.5, u.z_kink * 4.0):
            fd = (float(u.link_g(z * (1 + h))) - float(u.link_g(z * (1 - h)))) \
                / (2 * z * h)
            assert abs(float(u.g_prime(z)) - fd) <= 1e-5 * (1.0 + abs(fd))

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_wage_of_marginal_is_k_of_g(self, u):
        for z in (u.z_kink * 0.3, u.z_kink, u.z_kink * 2.0, u.z_kink * 10.0):
            want = float(u.k(u.link_g(z)))
            got = float(u.wage_of_marginal(z))
            assert abs(got - want) <= 1e-10 * (1.0 + abs(want))
            assert got >= 0.0

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_link_constant_below_kink(self, u):
        z = np.array([u.z_kink * 0.1, u.z_kink * 0.5, u.z_kink])
        assert np.allclose(u.link_g(z), u.u0, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.family)
    def test_below_liability_rejected(self, u):
        with pytest.raises(BelowLimitedLiability):
            u.k(u.u0 - 0.5)


class TestValidation:
    def test_crra_gamma_one_rejected(self):
        with pytest.raises(ValueError):
            CRRAUtility(w0=1.0, gamma=1.0)

    def test_crra_low_gamma_warns(self):
        with pytest.warns(UserWarning):
            CRRAUtility(w0=1.0, gamma=0.5)

    def test_cara_bounded_above(self):
        assert CARAUtility(w0=2.0, alpha=1.0).u_sup == 0.0

    def test_cost_requires_convexity(self):
        with pytest.raises(ValueError):
            CostSpec(kappa=1.0, power=1.0)

    def test_config_round_trip(self):
        u = utility_from_config({"family": "log", "w0": 50.0})
        assert isinstance(u, LogUtility) and u.w0 == 50.0
        c = cost_from_config({"kappa": 2.0, "power": 3.0})
        assert c.kappa == 2.0 and c.power == 3.0

    def test_config_unknown_family(self):
        with pytest.raises(ValidationError):
            utility_from_config({"family": "quadratic"})

    def test_config_unknown_parameter(self):
        with pytest.raises(ValidationError):
            utility_from_config({"family": "log", "w0": 50.0, "gamma": 2.0})

    def test_cost_config_missing_key(self):
        with pytest.raises(ValidationError):
            cost_from_config({"kappa": 1.0})


@settings(max_examples=60, deadline=None)
@given(w0=st.floats(0.1, 100.0), z=st.floats(0.01, 1e4))
def test_log_wage_nonnegative_and_zero_below_kink(w0, z):
    u = LogUtility(w0=w0)
    w = float(u.wage_of_marginal(z))
    assert w >= 0.0
    if z <= u.z_kink:
        assert w == 0.0
    else:
        assert abs(w - (z - w0)) <= 1e-12 * (1.0 + z)


@settings(max_examples=60, deadline=None)
@given(gamma=st.floats(1.1, 6.0), w0=st.floats(0.2, 10.0),
       x=st.floats(0.0, 50.0))
def test_crra_k_inverts_u_randomized(gamma, w0, x):
    u = CRRAUtility(w0=w0, gamma=gamma)
    assert abs(float(u.k(u.u(x))) - x) <= 1e-8 * (1.0 + x)
