import math

import numpy as np
import pytest

from tools.scalar_math import (
    binary_entropy,
    d_derivative,
    d_derivative_at_zero,
    entropy_hb_q,
    log_d_magnitude,
    log_q_function,
    q_function,
    xi,
)
from utils.errors import DomainError


class TestQFunction:
    def test_known_values(self):
        assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)
        assert q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-12)
        assert q_function(-1.0) == pytest.approx(1.0 - 0.15865525393145707, rel=1e-12)

    def test_symmetry(self, rng):
        x = rng.uniform(-10, 10, size=1000)
        np.testing.assert_allclose(q_function(x) + q_function(-x), 1.0, atol=1e-15)

    def test_vectorized_shape(self):
        x = np.zeros((3, 2))
        assert np.shape(q_function(x)) == (3, 2)
        assert isinstance(q_function(0.3), float)

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            q_function(float("nan"))


class TestLogQFunction:
    def test_matches_direct_log_where_q_is_representable(self):
        x = np.linspace(-2, 7.9, 200)
        np.testing.assert_allclose(log_q_function(x), np.log(q_function(x)), rtol=1e-12)

    def test_continuous_at_branch_switch(self):
        below = log_q_function(8.0)
        above = log_q_function(8.0 + 1e-9)
        assert above == pytest.approx(below, rel=1e-8)

    def test_deep_tail_follows_asymptotic_expansion(self):
        x = 40.0
        asymptotic = -x * x / 2 - math.log(x) - 0.5 * math.log(2 * math.pi) + math.log(1 - 1 / x**2 + 3 / x**4)
        value = log_q_function(x)
        assert math.isfinite(value)
        assert value == pytest.approx(asymptotic, abs=1e-6)

    def test_large_negative_is_near_zero(self):
        assert log_q_function(-40.0) == pytest.approx(0.0, abs=1e-300)

    def test_preserves_scalar_and_array_shapes(self):
        assert isinstance(log_q_function(50.0), float)
        assert np.shape(log_q_function(np.array([[1.0, 20.0]]))) == (1, 2)


class TestBinaryEntropy:
    def test_endpoints_and_midpoint(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)

    def test_nats(self):
        assert binary_entropy(0.5, log_base=math.e) == pytest.approx(math.log(2), rel=1e-14)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            binary_entropy(1.5)
        with pytest.raises(DomainError):
            binary_entropy(-0.1)

    def test_xi_zero_convention(self):
        assert xi(0.0) == 0.0
        assert xi(0.5) == pytest.approx(0.5, abs=1e-15)


class TestEntropyHbQ:
    def test_zero_power_gives_one_bit(self):
        assert entropy_hb_q(3.0, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_decreasing_in_beta(self):
        beta = np.linspace(0.0, 50.0, 500)
        values = entropy_hb_q(np.full_like(beta, 2.0), beta)
        assert np.all(np.diff(values) < 0)

    def test_vanishes_at_high_snr(self):
        assert entropy_hb_q(1.0, 5000.0) == 0.0

    def test_broadcasts(self):
        values = entropy_hb_q(np.array([1.0, 2.0, 3.0]), np.array([[0.5], [1.0]]))
        assert values.shape == (2, 3)


class TestDDerivative:
    def test_matches_centered_finite_differences(self):
        rng = np.random.default_rng(7)
        k = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), size=2000))
        beta = np.exp(rng.uniform(math.log(1e-3), math.log(10.0), size=2000))
        keep = k * beta <= 700
        k, beta = k[keep][:500], beta[keep][:500]
        assert k.size == 500

        h = np.minimum(1e-4 / k, 0.1 * beta)
        numerical = (entropy_hb_q(k, beta + h) - entropy_hb_q(k, beta - h)) / (2 * h)
        np.testing.assert_allclose(d_derivative(k, beta), numerical, rtol=1e-5)

    def test_negative(self, rng):
        k = rng.uniform(0.1, 10, size=100)
        beta = rng.uniform(0.01, 10, size=100)
        assert np.all(d_derivative(k, beta) < 0)

    def test_limit_at_zero(self):
        for k in (0.5, 1.0, 4.0):
            assert d_derivative(k, 1e-10) == pytest.approx(d_derivative_at_zero(k), rel=1e-6)
        assert d_derivative_at_zero(1.0) == pytest.approx(-1.0 / (math.pi * math.log(2)), rel=1e-14)

    def test_underflows_to_negative_zero(self):
        value = d_derivative(1.0, 2000.0)
        assert value == 0.0
        assert math.copysign(1.0, value) == -1.0
        assert not math.isnan(value)

    def test_tiny_but_finite_before_underflow(self):
        value = d_derivative(1.0, 600.0)
        assert value < 0
        assert abs(value) < 1e-100

    def test_log_magnitude_matches_where_finite(self):
        for beta in (0.5, 20.0, 600.0):
            assert log_d_magnitude(1.0, beta) == pytest.approx(math.log(-d_derivative(1.0, beta)), rel=1e-12)

    def test_log_magnitude_past_underflow(self):
        values = log_d_magnitude(1.0, np.array([1500.0, 2000.0, 4000.0]))
        assert np.all(np.isfinite(values))
        assert np.all(np.diff(values) < 0)
        assert values[1] == pytest.approx(-1000.0, rel=0.02)

    @pytest.mark.parametrize("k,beta", [(0.0, 1.0), (1.0, 0.0)])
    def test_log_magnitude_domain(self, k, beta):
        with pytest.raises(DomainError):
            log_d_magnitude(k, beta)

    def test_base_invariance(self, rng):
        k = rng.uniform(0.1, 10, size=50)
        beta = rng.uniform(0.01, 10, size=50)
        np.testing.assert_allclose(
            d_derivative(k, beta, log_base=math.e), d_derivative(k, beta) * math.log(2), rtol=1e-13
        )

    @pytest.mark.parametrize("k,beta", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, float("inf"))])
    def test_domain(self, k, beta):
        with pytest.raises(DomainError):
            d_derivative(k, beta)
