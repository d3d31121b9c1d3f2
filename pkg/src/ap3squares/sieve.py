"""Prime and smallest-prime-factor tables, plus the multiplicative functions built on them.

Ints everywhere; exact rationals (fractions.Fraction) for the local factors so
identity checks downstream stay exact.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

CACHE_MAGIC = b"AP3SIEVE"
CACHE_VERSION = 1

# Direct (non-segmented) sieving is fine up to this size; above it we sieve in
# fixed-size segments so the transient working set stays small.
_SIMPLE_SIEVE_CUTOFF = 1 << 22
_SEGMENT_SIZE = 1 << 20

DEFAULT_PRIME_LIMIT_CAP = 2_000_000_000
DEFAULT_FACTOR_LIMIT_CAP = 100_000_000


class CapacityError(Exception):
    """Requested table exceeds the configured memory budget."""


class CacheError(Exception):
    """Sieve cache file is missing, malformed, or does not match the request."""


def _simple_sieve(limit: int) -> np.ndarray:
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return is_p


class PrimeTable:
    """Primality bitset over [0, limit] plus the sorted list of primes."""

    def __init__(self, limit: int, is_prime: np.ndarray):
        self.limit = limit
        self.is_prime = is_prime
        self.primes = np.flatnonzero(is_prime).astype(np.int64)

    @classmethod
    def build(cls, limit: int, limit_cap: int = DEFAULT_PRIME_LIMIT_CAP) -> "PrimeTable":
        if limit < 2:
            raise ValueError(f"prime table limit must be >= 2, got {limit}")
        if limit > limit_cap:
            raise CapacityError(f"prime table limit {limit} exceeds cap {limit_cap}")
        if limit <= _SIMPLE_SIEVE_CUTOFF:
            return cls(limit, _simple_sieve(limit))
        base = np.flatnonzero(_simple_sieve(math.isqrt(limit)))
        is_p = np.zeros(limit + 1, dtype=bool)
        for low in range(2, limit + 1, _SEGMENT_SIZE):
            high = min(low + _SEGMENT_SIZE, limit + 1)
            seg = np.ones(high - low, dtype=bool)
            for p in base:
                p = int(p)
                if p * p >= high:
                    break
                start = max(p * p, ((low + p - 1) // p) * p)
                if start < high:
                    seg[start - low :: p] = False
            is_p[low:high] = seg
        is_p[:2] = False
        return cls(limit, is_p)

    def primes_in(self, a, b) -> np.ndarray:
        """Primes p with a < p <= b, in increasing order."""
        if b > self.limit:
            raise ValueError(f"range end {b} exceeds table limit {self.limit}")
        i = np.searchsorted(self.primes, a, side="right")
        j = np.searchsorted(self.primes, b, side="right")
        return self.primes[i:j]

    def __contains__(self, n: int) -> bool:
        return 0 <= n <= self.limit and bool(self.is_prime[n])

    def save(self, path) -> None:
        packed = np.packbits(self.is_prime)
        with open(path, "wb") as fh:
            fh.write(CACHE_MAGIC)
            fh.write(CACHE_VERSION.to_bytes(4, "little"))
            fh.write(self.limit.to_bytes(8, "little"))
            fh.write(packed.tobytes())

    @classmethod
    def load(cls, path, expected_limit: int) -> "PrimeTable":
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise CacheError(str(exc)) from exc
        if len(raw) < 20 or raw[:8] != CACHE_MAGIC:
            raise CacheError("bad magic")
        version = int.from_bytes(raw[8:12], "little")
        if version != CACHE_VERSION:
            raise CacheError(f"unsupported cache version {version}")
        limit = int.from_bytes(raw[12:20], "little")
        if limit != expected_limit:
            raise CacheError(f"cache limit {limit} != requested {expected_limit}")
        nbytes = (limit + 1 + 7) // 8
        if len(raw) != 20 + nbytes:
            raise CacheError("truncated bitset")
        bits = np.unpackbits(np.frombuffer(raw[20:], dtype=np.uint8))[: limit + 1]
        is_p = bits.astype(bool)
        if limit >= 4 and (not is_p[2] or not is_p[3] or is_p[4]):
            raise CacheError("bitset fails sanity check")
        return cls(limit, is_p)


class FactorTable:
    """Smallest-prime-factor array: spf[n] is the least prime dividing n (n >= 2)."""

    def __init__(self, limit: int, spf: np.ndarray):
        self.limit = limit
        self.spf = spf

    @classmethod
    def build(cls, limit: int, limit_cap: int = DEFAULT_FACTOR_LIMIT_CAP) -> "FactorTable":
        if limit < 2:
            raise ValueError(f"factor table limit must be >= 2, got {limit}")
        if limit > limit_cap:
            raise CapacityError(f"factor table limit {limit} exceeds cap {limit_cap}")
        spf = np.zeros(limit + 1, dtype=np.int64)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                view = spf[p * p :: p]
                view[view == 0] = p
        rest = np.flatnonzero(spf[2:] == 0) + 2
        spf[rest] = rest
        return cls(limit, spf)

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime-power factorization [(p, e), ...] with increasing p."""
        if not 1 <= n <= self.limit:
            raise ValueError(f"{n} outside factor table range [1, {self.limit}]")
        out = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def divisors(self, n: int) -> list[int]:
        divs = [1]
        for p, e in self.factorize(n):
            pk = 1
            new = []
            for _ in range(e):
                pk *= p
                new.extend(d * pk for d in divs)
            divs.extend(new)
        return divs


def factorize_trial(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization; for small arguments where no table is at hand."""
    if n < 1:
        raise ValueError("need n >= 1")
    out = []
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


@dataclass(frozen=True)
class Window:
    """Divisor range with explicit endpoint closure; hi may be math.inf."""

    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @classmethod
    def up_to(cls, bound) -> "Window":
        return cls(0.0, float(bound), closed_hi=True)

    @classmethod
    def between(cls, lo, hi) -> "Window":
        return cls(float(lo), float(hi))

    @classmethod
    def at_least(cls, lo) -> "Window":
        return cls(float(lo), math.inf, closed_lo=True)

    def contains(self, d: int) -> bool:
        above = d >= self.lo if self.closed_lo else d > self.lo
        below = d <= self.hi if self.closed_hi else d < self.hi
        return above and below


def three_windows(D: float, X: float) -> tuple[Window, Window, Window]:
    """The divisor regimes (0, D], (D, X/D), [X/D, inf) partitioning all divisors."""
    return (Window.up_to(D), Window.between(D, X / D), Window.at_least(X / D))


def chi4(n: int) -> int:
    """Non-principal character mod 4: +1, -1, 0 for n = 1, 3, even (mod 4)."""
    if n % 2 == 0:
        return 0
    return 1 if n % 4 == 1 else -1


def r2(m: int, ft: FactorTable) -> int:
    """Number of ordered integer pairs (a, b) with a^2 + b^2 = m."""
    total = 4
    for p, e in ft.factorize(m):
        if p % 4 == 1:
            total *= e + 1
        elif p % 4 == 3:
            if e % 2 == 1:
                return 0
    return total


def r2_windowed(m: int, w: Window, ft: FactorTable) -> int:
    """Sum of chi4(d) over divisors d of m lying in the window w.

    Unbounded windows are evaluated through complementary divisors m/d, so the
    condition becomes a bound on the small cofactor.
    """
    divs = ft.divisors(m)
    if math.isinf(w.hi):
        if w.lo <= 0:
            return sum(chi4(d) for d in divs)
        bound = m / w.lo
        if w.closed_lo:
            return sum(chi4(m // c) for c in divs if c <= bound)
        return sum(chi4(m // c) for c in divs if c < bound)
    return sum(chi4(d) for d in divs if w.contains(d))


def odd_prime_divisors(n: int, ft: FactorTable) -> list[int]:
    return [p for p, _ in ft.factorize(n) if p > 2]


def lambda_ratio(n: int, ft: FactorTable) -> Fraction:
    """Product of (p-1)/(p-2) over odd primes p dividing n, as an exact rational."""
    out = Fraction(1)
    for p in odd_prime_divisors(n, ft):
        out *= Fraction(p - 1, p - 2)
    return out


def phi(n: int, ft: FactorTable) -> int:
    out = 1
    for p, e in ft.factorize(n):
        out *= (p - 1) * p ** (e - 1)
    return out


def tau(n: int, ft: FactorTable) -> int:
    out = 1
    for _, e in ft.factorize(n):
        out *= e + 1
    return out
