import math

import numpy as np
import pytest
from scipy import integrate

from relaysim.special_math import bessel_k1, log_binomial, log_factorial


def k1_quadrature(x: float) -> float:
    """Independent oracle: adaptive quadrature of the integral representation
    K_1(x) = int_0^inf exp(-x cosh t) cosh t dt."""
    upper = math.acosh(760.0 / x) if x < 760 else 1.0
    val, _ = integrate.quad(
        lambda t: math.exp(-x * math.cosh(t)) * math.cosh(t),
        0.0,
        upper,
        limit=500,
        epsabs=0.0,
        epsrel=1e-11,
    )
    return val


class TestBesselK1:
    def test_small_argument_limit(self):
        # x*K_1(x) -> 1 as x -> 0+
        x = 1e-6
        assert abs(x * bessel_k1(x) - 1.0) <= 1e-4

    def test_frozen_quadrature_values(self):
        # computed with k1_quadrature at 1e-12 relative tolerance
        assert bessel_k1(1.0) == pytest.approx(0.6019072302, abs=5e-11)
        assert bessel_k1(2.0) == pytest.approx(0.1398658818, abs=5e-11)

    def test_matches_quadrature_oracle_on_grid(self):
        xs = np.logspace(-6, 2, 200)
        for x in xs:
            ref = k1_quadrature(float(x))
            assert abs(bessel_k1(float(x)) - ref) <= 1e-8 * ref

    def test_monotone_decreasing(self):
        xs = np.logspace(-8, math.log10(600), 400)
        vals = bessel_k1(xs)
        assert np.all(np.diff(vals) < 0)

    def test_underflow_returns_zero(self):
        assert bessel_k1(740.0) > 0.0
        assert bessel_k1(760.0) == 0.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            bessel_k1(bad)

    def test_array_input(self):
        out = bessel_k1(np.array([1.0, 2.0]))
        assert out.shape == (2,)
        assert out[0] == bessel_k1(1.0)


class TestLogBinomial:
    def test_small_exact_cases(self):
        assert log_binomial(5, 2) == pytest.approx(math.log(10), abs=1e-12)
        assert log_binomial(8, 3) == pytest.approx(math.log(56), abs=1e-12)

    def test_identity(self):
        for n in (0, 1, 7, 100):
            assert log_binomial(n, 0) == 0.0
            assert log_binomial(n, n) == 0.0

    def test_symmetry(self):
        for n in range(0, 120):
            for k in range(n + 1):
                assert abs(log_binomial(n, k) - log_binomial(n, n - k)) <= 1e-12

    def test_exp_roundtrip_small_n(self):
        # exact integer recovery is limited by float64 exp/log error, which
        # reaches one integer unit near n = 48; below that it is bit-exact
        for n in range(0, 48):
            for k in range(n + 1):
                assert round(math.exp(log_binomial(n, k))) == math.comb(n, k)

    def test_relative_accuracy_large_n(self):
        for n in (60, 200, 1000):
            for k in (1, n // 3, n // 2):
                exact = math.log(math.comb(n, k))
                assert log_binomial(n, k) == pytest.approx(exact, rel=1e-13)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            log_binomial(3, 4)
        with pytest.raises(ValueError):
            log_binomial(-1, 0)
        with pytest.raises(ValueError):
            log_binomial(10**6 + 1, 2)

    def test_log_factorial(self):
        assert log_factorial(0) == 0.0
        assert log_factorial(5) == pytest.approx(math.log(120), rel=1e-14)
        with pytest.raises(ValueError):
            log_factorial(-1)
