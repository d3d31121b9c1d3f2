import math
from fractions import Fraction

import pytest

from ap3squares import products
from ap3squares.sieve import chi4

# twin prime constant, prod_{p>2} (1 - 1/(p-1)^2), to 16 places
TWIN_PRIME_CONSTANT = 0.6601618158468696


def exact_head(cutoff, factor, pt):
    out = Fraction(1)
    for p in pt.primes_in(2, cutoff):
        out *= 1 + factor(int(p))
    return out


class TestSigma0:
    def test_against_twin_prime_constant(self):
        v = products.sigma0(1_000_000)
        assert abs(v.value - 2 * TWIN_PRIME_CONSTANT) < 2e-7

    def test_error_within_tail_bound(self):
        v = products.sigma0(1_000_000)
        assert abs(v.value - 2 * TWIN_PRIME_CONSTANT) <= v.tail_bound

    def test_matches_exact_rational_head(self, pt):
        v = products.sigma0(500)
        exact = 2 * exact_head(500, lambda p: Fraction(-1, (p - 1) ** 2), pt)
        assert abs(v.value - float(exact)) < 1e-13

    def test_rejects_tiny_cutoff(self):
        with pytest.raises(ValueError):
            products.sigma0(2)


class TestXi:
    def test_matches_exact_rational_head(self, pt):
        v = products.xi_constant(500)
        exact = exact_head(500, lambda p: Fraction(chi4(p), p * (p - 1)), pt)
        assert abs(v.value - float(exact)) < 1e-13

    def test_cutoff_consistency(self):
        a = products.xi_constant(1_000_000)
        b = products.xi_constant(4_000_000)
        assert abs(a.value - b.value) <= a.tail_bound

    def test_frozen_value(self):
        # frozen from a cutoff-1e7 run; alternating tails converge much faster
        # than the stated bound
        assert products.xi_constant(1_000_000).value == pytest.approx(
            0.851170827, abs=1e-6
        )


class TestRationalFactors:
    def test_y_factor_cases(self):
        assert products.y_factor(5, 1) == Fraction(1, 4)
        assert products.y_factor(3, 6) == Fraction(2, 1)
        assert products.y_factor(7, 21) == Fraction(2, 5)
        with pytest.raises(ValueError):
            products.y_factor(2, 6)

    def test_k_factor_hand_values(self):
        # direct substitution: chi(3) = -1, chi(5) = +1
        assert products.k_factor(3) == Fraction(-2, 5)
        assert products.k_factor(5) == Fraction(22, 63)
        with pytest.raises(ValueError):
            products.k_factor(2)

    def test_triple_series_factor_hand_value(self):
        assert products.triple_series_factor(3) == Fraction(17, 18)

    @pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 97, 101])
    def test_factor_identity(self, p):
        assert products.factor_identity_holds(p)


class TestPartialSums:
    def test_fd_hand_values(self):
        # d = 1: chi(t)/phi(t) for t = 1,3,5 gives 1 - 1/2 + 1/4
        assert products.fd_partial_sum(1, 5) == pytest.approx(0.75, abs=1e-15)
        # d = 3 doubles the terms at multiples of 3
        assert products.fd_partial_sum(3, 10) == pytest.approx(5 / 12, abs=1e-14)

    @pytest.mark.parametrize("d", [1, 3, 15])
    def test_fd_two_routes_agree(self, d):
        partial = products.fd_partial_sum(d, 200_000)
        limit = products.fd_limit(d, 1_000_000).value
        assert abs(partial - limit) < 1e-2

    def test_g_two_routes_agree(self):
        partial = products.g_partial_sum(200_000)
        limit = products.g_limit(1_000_000).value
        assert abs(partial - limit) < 1e-2

    def test_fd_limit_depends_on_odd_radical(self):
        assert products.fd_limit(3, 10_000).value == products.fd_limit(9, 10_000).value
        assert products.fd_limit(3, 10_000).value == products.fd_limit(6, 10_000).value

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            products.fd_partial_sum(1, 0)
        with pytest.raises(ValueError):
            products.fd_limit(15, 3)


class TestTripleSeries:
    def test_cutoff_consistency(self):
        a = products.triple_series(1_000_000)
        b = products.triple_series(4_000_000)
        assert abs(a.value - b.value) <= a.tail_bound

    def test_frozen_value(self):
        assert products.triple_series(1_000_000).value == pytest.approx(
            13.1912645, abs=1e-5
        )

    def test_leading_shape(self):
        # the product over odd primes is a mild correction of pi^2 * sigma0
        s0 = products.sigma0(100_000).value
        sr = products.triple_series(100_000).value
        assert 0.9 < sr / (math.pi**2 * s0) < 1.1


class TestTheta0:
    def test_closed_form(self):
        assert products.THETA0 == 0.5 - 0.25 * math.e * math.log(2.0)

    def test_decimal_value(self):
        assert products.THETA0 == pytest.approx(0.0289, abs=1e-4)
