import math
from fractions import Fraction

import pytest

from ap3squares.local import (
    Progression,
    ProgressionPair,
    classify,
    lemma3_invariant,
    sigma3,
    sigma_dl,
)
from ap3squares.sieve import lambda_ratio


def test_progression_rejects_common_factor():
    with pytest.raises(ValueError):
        Progression(6, 3)


class TestSigmaDl:
    def test_odd_shift_is_zero(self, ft):
        assert sigma_dl(3, Progression(1, 1), ft).zero

    def test_noncoprime_branch(self, ft):
        assert sigma_dl(4, Progression(3, 1), ft).zero

    def test_even_coprime(self, ft):
        lf = sigma_dl(6, Progression(3, 1), ft)
        assert lf.cofactor == 2
        assert lf.cofactor == lambda_ratio(18, ft)

    def test_parity_annihilation(self, ft):
        for n in range(1, 1001, 2):
            assert sigma_dl(n, Progression(5, 2), ft).zero


class TestClassify:
    def test_shared_prime_dividing_anchor(self, ft):
        cls = classify(ProgressionPair(3, 1, 3, 2), ft)
        assert cls.c == {3} and not cls.b and not cls.d

    def test_shared_prime_missing_anchor(self, ft):
        cls = classify(ProgressionPair(3, 1, 3, 1), ft)
        assert cls.d == {3} and not cls.b and not cls.c

    def test_disjoint_moduli(self, ft):
        cls = classify(ProgressionPair(3, 1, 5, 1), ft)
        assert cls.b == {3, 5} and not cls.c and not cls.d

    def test_exhaustive_and_disjoint(self, ft):
        for d1 in range(1, 40):
            for d2 in range(1, 40):
                pp = ProgressionPair(d1, 1, d2, 1)
                cls = classify(pp, ft)
                odd = {p for p, _ in ft.factorize(d1 * d2) if p > 2}
                assert cls.b | cls.c | cls.d == odd
                assert not (cls.b & cls.c or cls.b & cls.d or cls.c & cls.d)


class TestSigma3:
    def test_trivial_pair(self, ft):
        assert sigma3(ProgressionPair(1, 1, 1, 1), ft).cofactor == 1

    def test_zero_branch(self, ft):
        assert sigma3(ProgressionPair(3, 1, 3, 2), ft).zero

    def test_shared_modulus(self, ft):
        assert sigma3(ProgressionPair(3, 1, 3, 1), ft).cofactor == 2

    def test_cross_check_identity(self, ft):
        # against the ratio product over odd primes shared by the two moduli
        for d in range(1, 200, 2):
            for t in range(1, 200, 2):
                got = sigma3(ProgressionPair(d, 1, t, 1), ft).cofactor
                want = Fraction(1)
                for p, _ in ft.factorize(math.gcd(d, t)):
                    if p > 2:
                        want *= Fraction(p - 1, p - 2)
                assert got == want, (d, t)

    def test_swap_symmetry_when_classes_agree(self, ft):
        for d1 in range(1, 30):
            for d2 in range(1, 30):
                for l1, l2 in ((1, 1), (1, 3), (5, 3)):
                    if math.gcd(d1, l1) != 1 or math.gcd(d2, l2) != 1:
                        continue
                    pp = ProgressionPair(d1, l1, d2, l2)
                    sw = pp.swapped()
                    if classify(pp, ft) == classify(sw, ft):
                        assert sigma3(pp, ft).cofactor == sigma3(sw, ft).cofactor


class TestLemma3:
    def test_examples(self, ft):
        assert lemma3_invariant(1, 2, 1, 6, ft)
        assert lemma3_invariant(3, 4, 1, 10, ft)

    def test_small_grid(self, ft):
        for d in range(1, 16):
            for m in range(2, 16, 2):
                for l in range(1, d + 1):
                    if math.gcd(d, l) != 1:
                        continue
                    for n in range(1, 60):
                        assert lemma3_invariant(d, m, l, n, ft), (d, m, l, n)
