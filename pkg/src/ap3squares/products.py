"""Numeric Euler products and Dirichlet-series limits with truncation control.

Every product here converges like sum 1/p^2; values carry the cutoff and a
crude monotone tail estimate. Products take factors 1 + x with x computed
directly (never as f - 1), multiply the small primes in fixed order, and
accumulate the tail in log space via exact float summation.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .sieve import PrimeTable, chi4, factorize_trial

# Hooley's divisor-concentration exponent: 1/2 - (e log 2)/4.
THETA0 = 0.5 - 0.25 * math.e * math.log(2.0)

_HEAD_CUTOFF = 1000  # direct multiplication below, log-space above
DEFAULT_CUTOFF = 10_000_000


@dataclass(frozen=True)
class EulerProductValue:
    value: float
    cutoff: int
    tail_bound: float


@lru_cache(maxsize=4)
def _primes_upto(limit: int) -> np.ndarray:
    return PrimeTable.build(limit).primes


def _chi_of(primes: np.ndarray) -> np.ndarray:
    res = primes % 4
    return np.where(res == 1, 1.0, np.where(res == 3, -1.0, 0.0))


def _accumulate(primes: np.ndarray, x: np.ndarray, lead: float) -> float:
    head = primes <= _HEAD_CUTOFF
    value = lead
    for xi in x[head]:
        value *= 1.0 + xi
    tail = math.fsum(np.log1p(x[~head]))
    return float(value * math.exp(tail))


def _tail_bound(coeff: float, cutoff: int) -> float:
    # Integral-comparison estimate of sum_{p > P} coeff / p^2.
    return coeff / ((cutoff - 1) * math.log(cutoff))


def sigma0(cutoff: int, pt: PrimeTable | None = None) -> EulerProductValue:
    """2 * prod over odd primes p <= cutoff of (1 - 1/(p-1)^2)."""
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    primes = (pt.primes if pt is not None else _primes_upto(cutoff)).astype(np.float64)
    primes = primes[(primes > 2) & (primes <= cutoff)]
    x = -1.0 / (primes - 1.0) ** 2
    return EulerProductValue(_accumulate(primes, x, 2.0), cutoff, _tail_bound(2.0, cutoff))


def xi_constant(cutoff: int, pt: PrimeTable | None = None) -> EulerProductValue:
    """prod over p <= cutoff of (1 + chi4(p)/(p(p-1))); the factor at p = 2 is 1."""
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    p = (pt.primes if pt is not None else _primes_upto(cutoff)).astype(np.float64)
    p = p[(p > 2) & (p <= cutoff)]
    x = _chi_of(p.astype(np.int64)) / (p * (p - 1.0))
    return EulerProductValue(_accumulate(p, x, 1.0), cutoff, _tail_bound(1.0, cutoff))


def y_factor(p: int, d: int) -> Fraction:
    """1/(p-1) when p does not divide d, else 2/(p-2)."""
    if d % p == 0:
        if p == 2:
            raise ValueError("p = 2 dividing d gives a zero denominator")
        return Fraction(2, p - 2)
    return Fraction(1, p - 1)


def k_factor(p: int) -> Fraction:
    """Rational coefficient of the collapsed modulus series at an odd prime."""
    if p < 3:
        raise ValueError("need an odd prime")
    c = chi4(p)
    num = p * p + p * c - 2 * p + 2 * c
    den = p**3 - 3 * p * p + p * c + 2 * p - 2 * c
    assert den != 0
    return Fraction(num, den)


def _odd_radical(d: int) -> list[int]:
    return [p for p, _ in factorize_trial(d) if p > 2]


def fd_limit(d: int, cutoff: int, pt: PrimeTable | None = None) -> EulerProductValue:
    """Limit of the partial sums of the chi/phi series twisted at primes dividing d.

    Equals (pi/4) * prod_{p <= cutoff} (1 + chi4(p) * y_factor(p, d) / p); the
    value depends only on the odd radical of d.
    """
    if d < 1:
        raise ValueError("need d >= 1")
    rad = _odd_radical(d)
    if rad and cutoff < max(rad):
        raise ValueError("cutoff below the largest prime factor of d")
    p = (pt.primes if pt is not None else _primes_upto(cutoff)).astype(np.int64)
    p = p[(p > 2) & (p <= cutoff)]
    pf = p.astype(np.float64)
    x = _chi_of(p) / (pf * (pf - 1.0))
    for q in rad:
        x[p == q] = chi4(q) * 2.0 / (q * (q - 2.0))
    return EulerProductValue(_accumulate(pf, x, math.pi / 4.0), cutoff, _tail_bound(2.0, cutoff))


def g_limit(cutoff: int, pt: PrimeTable | None = None) -> EulerProductValue:
    """(pi/4) * prod_{2 < p <= cutoff} (1 + chi4(p) * k_factor(p) / p)."""
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    p = (pt.primes if pt is not None else _primes_upto(cutoff)).astype(np.int64)
    p = p[(p > 2) & (p <= cutoff)]
    pf = p.astype(np.float64)
    chi = _chi_of(p)
    num = pf * pf + pf * chi - 2.0 * pf + 2.0 * chi
    den = pf**3 - 3.0 * pf * pf + pf * chi + 2.0 * pf - 2.0 * chi
    x = chi * (num / den) / pf
    return EulerProductValue(_accumulate(pf, x, math.pi / 4.0), cutoff, _tail_bound(2.0, cutoff))


def triple_series_factor(p: int) -> Fraction:
    """Exact per-prime factor of the triple singular series at an odd prime."""
    c = chi4(p)
    num = 2 * p * p + p * c - 4 * p + 2 * c
    return 1 + Fraction(c * num, p * p * (p - 1) * (p - 2))


def triple_series(cutoff: int, pt: PrimeTable | None = None) -> EulerProductValue:
    """pi^2 * sigma0 * prod over odd p <= cutoff of the triple-series factor."""
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    s0 = sigma0(cutoff, pt)
    p = (pt.primes if pt is not None else _primes_upto(cutoff)).astype(np.int64)
    p = p[(p > 2) & (p <= cutoff)]
    pf = p.astype(np.float64)
    chi = _chi_of(p)
    num = 2.0 * pf * pf + pf * chi - 4.0 * pf + 2.0 * chi
    x = chi * num / (pf * pf * (pf - 1.0) * (pf - 2.0))
    value = math.pi**2 * s0.value * _accumulate(pf, x, 1.0)
    # coefficient covers the ~2/p^2 factor tails scaled by the product's size
    return EulerProductValue(value, cutoff, _tail_bound(30.0, cutoff))


@lru_cache(maxsize=2)
def _phi_array(limit: int) -> np.ndarray:
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in _primes_upto(limit):
        phi[p::p] -= phi[p::p] // p
    return phi


def _chi_array(limit: int) -> np.ndarray:
    n = np.arange(limit + 1, dtype=np.int64)
    res = n % 4
    return np.where(res == 1, 1.0, np.where(res == 3, -1.0, 0.0))


def fd_partial_sum(d: int, T: int) -> float:
    """Partial sum to T of the multiplicative series underlying fd_limit.

    Term at t: chi4(t)/phi(t) * prod_{p | gcd(d,t)} (p-1)/(p-2), summed in
    increasing t with exact float accumulation.
    """
    if T < 1:
        raise ValueError("need T >= 1")
    phi = _phi_array(T)
    val = np.zeros(T + 1)
    val[1:] = _chi_array(T)[1:] / phi[1:]
    for q in _odd_radical(d):
        if q <= T:
            val[q::q] *= (q - 1.0) / (q - 2.0)
    return math.fsum(val[1:])


def g_partial_sum(T: int) -> float:
    """Partial sum to T of the collapsed modulus series underlying g_limit."""
    if T < 1:
        raise ValueError("need T >= 1")
    phi = _phi_array(T)
    val = np.zeros(T + 1)
    val[1:] = _chi_array(T)[1:] / phi[1:]
    for p in _primes_upto(T):
        p = int(p)
        if p == 2:
            continue
        c = chi4(p)
        fac = (1.0 + 2.0 * c / (p * (p - 2.0))) / (1.0 + c / (p * (p - 1.0)))
        val[p::p] *= fac
    return math.fsum(val[1:])


def factor_identity_holds(p: int) -> bool:
    """Exact check that the xi factor times the g-series factor gives the triple factor."""
    c = chi4(p)
    lhs = (1 + Fraction(c, p * (p - 1))) * (1 + Fraction(c) * k_factor(p) / p)
    return lhs == triple_series_factor(p)
