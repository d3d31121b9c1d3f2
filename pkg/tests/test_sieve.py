import math
import random
from fractions import Fraction

import numpy as np
import pytest

from ap3squares.sieve import (
    CacheError,
    CapacityError,
    FactorTable,
    PrimeTable,
    Window,
    chi4,
    lambda_ratio,
    phi,
    r2,
    r2_windowed,
    tau,
    three_windows,
)


def trial_is_prime(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def lattice_r2(m):
    cnt = 0
    r = math.isqrt(m)
    for a in range(-r, r + 1):
        b2 = m - a * a
        b = math.isqrt(b2)
        if b * b == b2:
            cnt += 1 if b == 0 else 2
    return cnt


class TestPrimeTable:
    def test_small_primes(self, pt):
        assert list(pt.primes_in(0, 10)) == [2, 3, 5, 7]

    def test_count_100(self, pt):
        assert len(pt.primes_in(0, 100)) == 25

    def test_count_1e6(self):
        assert len(PrimeTable.build(10**6).primes) == 78498

    def test_against_trial_division(self, pt):
        for n in range(10**4):
            assert bool(pt.is_prime[n]) == trial_is_prime(n), n

    def test_primes_in_upper_half(self, pt):
        X = 10**4
        got = list(pt.primes_in(X / 2, X))
        want = [n for n in range(X // 2 + 1, X + 1) if trial_is_prime(n)]
        assert got == want

    def test_segmented_matches_direct(self):
        import ap3squares.sieve as sv

        limit = 5 * 10**6
        direct = sv._simple_sieve(limit)
        seg = PrimeTable.build(limit)  # above the simple cutoff, takes segment path
        assert limit > sv._SIMPLE_SIEVE_CUTOFF
        assert np.array_equal(seg.is_prime, direct)

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            PrimeTable.build(10**7, limit_cap=10**6)

    def test_cache_roundtrip(self, tmp_path):
        pt = PrimeTable.build(10**4)
        path = tmp_path / "sieve.bin"
        pt.save(path)
        loaded = PrimeTable.load(path, 10**4)
        assert np.array_equal(loaded.is_prime, pt.is_prime)

    def test_cache_rejects_corruption(self, tmp_path):
        pt = PrimeTable.build(10**4)
        path = tmp_path / "sieve.bin"
        pt.save(path)
        raw = bytearray(path.read_bytes())
        raw[0] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(CacheError):
            PrimeTable.load(path, 10**4)

    def test_cache_rejects_wrong_limit(self, tmp_path):
        pt = PrimeTable.build(10**4)
        path = tmp_path / "sieve.bin"
        pt.save(path)
        with pytest.raises(CacheError):
            PrimeTable.load(path, 10**5)


class TestFactorTable:
    def test_spf_invariants(self, ft):
        for n in range(2, 10**4):
            p = int(ft.spf[n])
            assert n % p == 0
            assert trial_is_prime(p)
            assert all(n % q for q in range(2, p))

    def test_factorize(self, ft):
        assert ft.factorize(360) == [(2, 3), (3, 2), (5, 1)]
        assert ft.factorize(1) == []

    def test_divisors(self, ft):
        assert sorted(ft.divisors(12)) == [1, 2, 3, 4, 6, 12]


class TestChi:
    def test_values(self):
        assert chi4(1) == 1
        assert chi4(2) == 0
        assert chi4(7) == -1

    def test_completely_multiplicative(self):
        rng = random.Random(1)
        for _ in range(1000):
            a, b = rng.randrange(1, 10**6), rng.randrange(1, 10**6)
            assert chi4(a * b) == chi4(a) * chi4(b)


class TestR2:
    def test_examples(self, ft):
        assert r2(1, ft) == 4
        assert r2(3, ft) == 0
        assert r2(25, ft) == 12

    def test_lattice_oracle(self, ft):
        for m in range(1, 2001):
            assert r2(m, ft) == lattice_r2(m), m

    def test_windowed_examples(self, ft):
        assert r2_windowed(24, Window.up_to(3), ft) == 0
        assert 4 * r2_windowed(25, Window(0, math.inf), ft) == r2(25, ft)

    def test_window_partition(self, ft):
        rng = random.Random(7)
        X = 10**4
        for _ in range(500):
            m = rng.randrange(1, 3 * 10**4)
            D = rng.uniform(1, math.sqrt(X))
            parts = [r2_windowed(m, w, ft) for w in three_windows(D, X)]
            assert 4 * sum(parts) == r2(m, ft), (m, D)

    def test_complementary_route_matches_direct(self, ft):
        for m in range(1, 500):
            lo = 7.0
            via_complement = r2_windowed(m, Window.at_least(lo), ft)
            direct = sum(chi4(d) for d in ft.divisors(m) if d >= lo)
            assert via_complement == direct


class TestMultiplicativeFunctions:
    def test_lambda_examples(self, ft):
        assert lambda_ratio(1, ft) == 1
        assert lambda_ratio(9, ft) == 2
        assert lambda_ratio(35, ft) == Fraction(8, 5)

    def test_lambda_ignores_twos(self, ft):
        for n in range(1, 200, 2):
            assert lambda_ratio(n, ft) == lambda_ratio(4 * n, ft)

    def test_phi_tau_examples(self, ft):
        assert phi(1, ft) == 1 and tau(1, ft) == 1
        assert phi(12, ft) == 4 and tau(12, ft) == 6

    @pytest.mark.parametrize("func", [lambda_ratio, phi, tau])
    def test_multiplicative_on_coprime_pairs(self, func, ft):
        rng = random.Random(3)
        done = 0
        while done < 1000:
            a, b = rng.randrange(1, 200), rng.randrange(1, 200)
            if math.gcd(a, b) != 1:
                continue
            assert func(a * b, ft) == func(a, ft) * func(b, ft)
            done += 1
