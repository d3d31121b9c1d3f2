"""Exact local densities for the progression-conditioned counting problems.

All values are returned as exact rational cofactors of the odd-prime density
constant (sigma0 in the product module); sigma0 itself is attached numerically
only at reporting time.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .sieve import FactorTable, lambda_ratio, odd_prime_divisors

# Products over prime classes run over odd primes only; the leading factor 2 in
# the triple density carries the 2-adic contribution. Including p = 2 would
# zero the density identically.
INCLUDE_TWO = False


@dataclass(frozen=True)
class Progression:
    d: int
    l: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"modulus must be positive, got {self.d}")
        if math.gcd(self.d, self.l) != 1:
            raise ValueError(f"residue {self.l} not coprime to modulus {self.d}")


@dataclass(frozen=True)
class ProgressionPair:
    d1: int
    l1: int
    d2: int
    l2: int

    def __post_init__(self):
        Progression(self.d1, self.l1)
        Progression(self.d2, self.l2)

    def swapped(self) -> "ProgressionPair":
        return ProgressionPair(self.d2, self.l2, self.d1, self.l1)


@dataclass(frozen=True)
class PrimeClassification:
    """Tags for odd primes dividing d1*d2; every other odd prime is implicitly class A."""

    b: frozenset
    c: frozenset
    d: frozenset


@dataclass(frozen=True)
class LocalFactor:
    """Exact rational cofactor of sigma0; .value attaches a numeric sigma0."""

    cofactor: Fraction

    @property
    def zero(self) -> bool:
        return self.cofactor == 0

    def value(self, sigma0: float) -> float:
        return float(self.cofactor) * sigma0


ZERO_FACTOR = LocalFactor(Fraction(0))


def _lambda_nd(n: int, d: int, ft: FactorTable) -> Fraction:
    cof = Fraction(1)
    for p in set(odd_prime_divisors(n, ft)) | set(odd_prime_divisors(d, ft)):
        cof *= Fraction(p - 1, p - 2)
    return cof


def sigma_dl(n: int, prog: Progression, ft: FactorTable) -> LocalFactor:
    """Local density of the sum equation p1 + p2 = n in progression (d, l).

    Nonzero only for even n with (d, n - l) = 1; then equals sigma0 times the
    odd-prime ratio product over primes dividing n*d.
    """
    if n % 2 != 0 or math.gcd(prog.d, n - prog.l) != 1:
        return ZERO_FACTOR
    return LocalFactor(_lambda_nd(n, prog.d, ft))


def sigma_lag(n: int, prog: Progression, ft: FactorTable) -> LocalFactor:
    """Local density of the lag equation 2 p2 - p1 = n with p2 in (d, l).

    The forced residue of p1 is 2l - n and the 2-adic constraint flips: the
    equation is soluble in odd p1 only for odd n. Same cofactor as sigma_dl.
    """
    if n % 2 == 0 or math.gcd(prog.d, 2 * prog.l - n) != 1:
        return ZERO_FACTOR
    return LocalFactor(_lambda_nd(n, prog.d, ft))


def classify(pp: ProgressionPair, ft: FactorTable) -> PrimeClassification:
    """Partition the odd primes dividing d1*d2 into the three modulus classes."""
    p1 = set(odd_prime_divisors(pp.d1, ft))
    p2 = set(odd_prime_divisors(pp.d2, ft))
    both = p1 & p2
    anchor = pp.l1 - 2 * pp.l2
    c = frozenset(p for p in both if anchor % p == 0)
    d = frozenset(both - c)
    b = frozenset(p1 ^ p2)
    return PrimeClassification(b=b, c=c, d=d)


def sigma3(pp: ProgressionPair, ft: FactorTable) -> LocalFactor:
    """Local density of the three-term equation for a pair of progressions.

    Zero when some odd prime divides both moduli and the residue anchor;
    otherwise sigma0 times prod_{p in class D} (p-1)/(p-2).
    """
    cls = classify(pp, ft)
    if cls.c:
        return ZERO_FACTOR
    cof = Fraction(1)
    for p in cls.d:
        cof *= Fraction(p - 1, p - 2)
    return LocalFactor(cof)


def lemma3_invariant(d: int, m: int, l: int, n: int, ft: FactorTable) -> bool:
    """Exact j-independence of the two local densities at residues 1 +/- m mod 4m."""
    plus = Progression(4 * m, 1 + m)
    minus = Progression(4 * m, 1 - m)
    if sigma_dl(n, plus, ft).cofactor != sigma_dl(n, minus, ft).cofactor:
        return False
    tp = sigma3(ProgressionPair(d, l, 4 * m, 1 + m), ft)
    tm = sigma3(ProgressionPair(d, l, 4 * m, 1 - m), ft)
    return tp.cofactor == tm.cofactor
