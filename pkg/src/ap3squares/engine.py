"""Enumeration-based counting: weighted triple sums, discrepancy records, and
the worst-case aggregates over moduli and subintervals.

Reduction order is part of the contract: heavy kernels accumulate per-block
partial sums (fixed block size) that are combined in block order, so results
are bit-identical across thread counts.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np
from numba import njit, prange

from . import products
from .local import Progression, ProgressionPair, sigma3, sigma_dl, sigma_lag
from .sieve import FactorTable, PrimeTable, Window, chi4, phi, r2, r2_windowed, three_windows


class BudgetError(Exception):
    """Projected work exceeds the configured budget; pass force to override."""


@dataclass
class Tables:
    pt: PrimeTable
    ft: FactorTable

    @classmethod
    def build(cls, prime_limit: int, factor_limit: Optional[int] = None) -> "Tables":
        return cls(PrimeTable.build(prime_limit), FactorTable.build(factor_limit or prime_limit))


@dataclass
class RunConfig:
    x: int
    c: float = 1.0
    euler_cutoff: int = products.DEFAULT_CUTOFF
    threads: Optional[int] = None
    j_descriptor: str = "full+halves+quarters"
    seed: int = 0
    d_override: Optional[float] = None
    pair_budget: int = 4_000_000_000
    force: bool = False

    def __post_init__(self):
        if self.x < 4:
            raise ValueError("x must be >= 4")
        if self.D >= math.sqrt(self.x):
            raise ValueError("divisor threshold must stay below sqrt(x)")

    @property
    def D(self) -> float:
        if self.d_override is not None:
            return self.d_override
        return math.sqrt(self.x) * math.log(self.x) ** (-self.c)


@dataclass
class CountResult:
    value: float
    term_count: int
    elapsed: float


@dataclass(frozen=True)
class IntervalJ:
    """Half-open subinterval (a, b] of (X/2, X]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"empty interval ({self.a}, {self.b}]")


@dataclass(frozen=True)
class DiscrepancyRecord:
    variant: int
    d: tuple
    l: tuple
    n: Optional[int]
    j: tuple
    i_value: float
    phi_value: int
    local_value: float
    delta: float


@dataclass
class BvResult:
    """Worst-case discrepancy mass; the max is over a sampled interval family,
    so both values are lower bounds for the true suprema."""

    lemma_value: float  # shift range restricted to n <= X, normalized by X^2
    natural_value: float  # full shift range, normalized by X^2
    x: int
    d_max: int
    j_count: int


def full_interval(X: int) -> IntervalJ:
    return IntervalJ(X / 2, float(X))


def build_j_family(X: int, descriptor: str, seed: int = 0) -> list[IntervalJ]:
    """Finite stand-in for the infinite family of subintervals of (X/2, X]."""
    lo, hi = X / 2, float(X)
    out: list[IntervalJ] = []
    for part in descriptor.split("+"):
        if part == "full":
            out.append(IntervalJ(lo, hi))
        elif part == "halves":
            mid = (lo + hi) / 2
            out.extend([IntervalJ(lo, mid), IntervalJ(mid, hi)])
        elif part == "quarters":
            qs = np.linspace(lo, hi, 5)
            out.extend(IntervalJ(float(a), float(b)) for a, b in zip(qs[:-1], qs[1:]))
        elif part.startswith("rand:"):
            k = int(part.split(":", 1)[1])
            rng = np.random.default_rng(seed)
            for _ in range(k):
                a, b = sorted(rng.integers(int(lo), int(hi), size=2, endpoint=True))
                if a == b:
                    b = min(int(hi), a + 1)
                out.append(IntervalJ(float(a), float(b)))
        else:
            raise ValueError(f"unknown interval family part {part!r}")
    return out


# ---------------------------------------------------------------------------
# triple-sum kernels


_BLOCK = 64


@njit(cache=True, parallel=True)
def _triple_sum_float(primes, w1, w2, logs, is_prime, lo, hi, skip_equal):
    n = primes.shape[0]
    nblocks = (n + _BLOCK - 1) // _BLOCK
    sums = np.zeros(nblocks, dtype=np.float64)
    counts = np.zeros(nblocks, dtype=np.int64)
    for b in prange(nblocks):
        s = 0.0
        comp = 0.0
        cnt = 0
        end = min((b + 1) * _BLOCK, n)
        for i2 in range(b * _BLOCK, end):
            v2 = w2[i2]
            if v2 == 0.0:
                continue
            twice = 2 * primes[i2]
            for i1 in range(n):
                if skip_equal and i1 == i2:
                    continue
                v1 = w1[i1]
                if v1 == 0.0:
                    continue
                p3 = twice - primes[i1]
                if p3 > lo and p3 <= hi and is_prime[p3]:
                    cnt += 1
                    term = v1 * v2 * logs[p3]
                    y = term - comp
                    t = s + y
                    comp = (t - s) - y
                    s = t
        sums[b] = s
        counts[b] = cnt
    return sums, counts


@njit(cache=True, parallel=True)
def _triple_sum_int(primes, w1, w2, is_prime, lo, hi, skip_equal):
    n = primes.shape[0]
    nblocks = (n + _BLOCK - 1) // _BLOCK
    sums = np.zeros(nblocks, dtype=np.int64)
    for b in prange(nblocks):
        s = 0
        end = min((b + 1) * _BLOCK, n)
        for i2 in range(b * _BLOCK, end):
            v2 = w2[i2]
            if v2 == 0:
                continue
            twice = 2 * primes[i2]
            for i1 in range(n):
                if skip_equal and i1 == i2:
                    continue
                v1 = w1[i1]
                if v1 == 0:
                    continue
                p3 = twice - primes[i1]
                if p3 > lo and p3 <= hi and is_prime[p3]:
                    s += v1 * v2
        sums[b] = s
    return sums


def _set_threads(threads: Optional[int]) -> None:
    if threads is not None:
        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))


def _log_table(limit: int) -> np.ndarray:
    logs = np.zeros(limit + 1)
    logs[1:] = np.log(np.arange(1, limit + 1, dtype=np.float64))
    return logs


def _check_pair_budget(n_pairs: int, cfg: RunConfig) -> None:
    if n_pairs > cfg.pair_budget and not cfg.force:
        raise BudgetError(f"projected pair count {n_pairs} exceeds budget {cfg.pair_budget}")


def _range_primes(X: int, pt: PrimeTable) -> tuple[np.ndarray, np.ndarray]:
    p = pt.primes_in(X / 2, X)
    return p, np.log(p.astype(np.float64))


def r_values(primes: np.ndarray, ft: FactorTable) -> np.ndarray:
    return np.array([r2(int(p) - 1, ft) for p in primes], dtype=np.int64)


def windowed_r_values(primes: np.ndarray, windows, ft: FactorTable) -> np.ndarray:
    return np.array(
        [[r2_windowed(int(p) - 1, w, ft) for w in windows] for p in primes], dtype=np.int64
    )


def r_of_x(cfg: RunConfig, include_degenerate: bool, tables: Tables) -> CountResult:
    """Triple sum over X/2 < p1, p2 <= X with p3 = 2 p2 - p1 prime in the same
    range, weighted by r2(p1-1) r2(p2-1) log p1 log p2 log p3."""
    t0 = time.perf_counter()
    X = cfg.x
    p, lp = _range_primes(X, tables.pt)
    _check_pair_budget(len(p) ** 2, cfg)
    _set_threads(cfg.threads)
    w = r_values(p, tables.ft) * lp
    sums, counts = _triple_sum_float(
        p, w, w, _log_table(X), tables.pt.is_prime, X / 2, X, not include_degenerate
    )
    return CountResult(math.fsum(sums), int(counts.sum()), time.perf_counter() - t0)


def r_ij(cfg: RunConfig, i: int, j: int, tables: Tables) -> CountResult:
    """Same triple sum with the r2 weights truncated to divisor regimes i, j."""
    t0 = time.perf_counter()
    X = cfg.x
    p, lp = _range_primes(X, tables.pt)
    _check_pair_budget(len(p) ** 2, cfg)
    _set_threads(cfg.threads)
    windows = three_windows(cfg.D, X)
    rw = windowed_r_values(p, windows, tables.ft)
    w1 = rw[:, i - 1] * lp
    w2 = rw[:, j - 1] * lp
    sums, counts = _triple_sum_float(
        p, w1, w2, _log_table(X), tables.pt.is_prime, X / 2, X, False
    )
    return CountResult(math.fsum(sums), int(counts.sum()), time.perf_counter() - t0)


@dataclass
class DecomposeResult:
    total: float
    parts: dict  # (i, j) -> float
    float_residual_rel: float
    int_residual: int
    elapsed: float


def decompose(cfg: RunConfig, tables: Tables) -> DecomposeResult:
    """Evaluate the nine regime components and both partition residuals.

    The integer residual compares the log-free r-weighted sums exactly; the
    float residual is relative, on the log-weighted sums.
    """
    t0 = time.perf_counter()
    X = cfg.x
    p, lp = _range_primes(X, tables.pt)
    _check_pair_budget(10 * len(p) ** 2, cfg)
    _set_threads(cfg.threads)
    logs = _log_table(X)
    rv = r_values(p, tables.ft)
    rw = windowed_r_values(p, three_windows(cfg.D, X), tables.ft)
    is_p = tables.pt.is_prime

    total = math.fsum(_triple_sum_float(p, rv * lp, rv * lp, logs, is_p, X / 2, X, False)[0])
    total_int = int(_triple_sum_int(p, rv, rv, is_p, X / 2, X, False).sum())
    parts = {}
    parts_int = 0
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            w1 = rw[:, i - 1] * lp
            w2 = rw[:, j - 1] * lp
            parts[(i, j)] = math.fsum(
                _triple_sum_float(p, w1, w2, logs, is_p, X / 2, X, False)[0]
            )
            parts_int += int(
                _triple_sum_int(p, rw[:, i - 1], rw[:, j - 1], is_p, X / 2, X, False).sum()
            )
    recombined = 16.0 * math.fsum(parts.values())
    denom = max(abs(total), 1.0)
    return DecomposeResult(
        total=total,
        parts=parts,
        float_residual_rel=abs(total - recombined) / denom,
        int_residual=total_int - 16 * parts_int,
        elapsed=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Linnik sum


@dataclass
class LinnikResult:
    total: int
    main_term: float
    ratio: float


def linnik_sum(X: int, tables: Tables, cutoff: int = 1_000_000) -> LinnikResult:
    """Exact sum of r2(p-1) over p <= X, with the expected main term for comparison."""
    total = int(sum(r2(int(p) - 1, tables.ft) for p in tables.pt.primes_in(0, X)))
    xi = products.xi_constant(cutoff).value
    main = math.pi * X * xi / math.log(X)
    return LinnikResult(total, main, total / main)


# ---------------------------------------------------------------------------
# lattice counts and weighted prime sums


def _count_int_between(excl_lo, incl_hi):
    """Number of integers m with excl_lo < m <= incl_hi (real bounds)."""
    return np.maximum(
        np.floor(incl_hi).astype(np.int64) - np.floor(excl_lo).astype(np.int64), 0
    )


def _phi1_vec(n, X: int, J: IntervalJ):
    excl = np.maximum(J.a, (n + X / 2) / 2.0)
    incl = np.minimum(J.b, (n + X) / 2.0)
    return _count_int_between(excl, incl)


def _phi2_vec(n, X: int, J: IntervalJ):
    excl = np.maximum(J.a, n - X - 1.0)
    incl = np.minimum(J.b, np.ceil(n - X / 2.0) - 1.0)
    return _count_int_between(excl, incl)


def phi3_count(X: int, J1: IntervalJ, J2: IntervalJ) -> int:
    m2 = np.arange(math.floor(J2.a) + 1, math.floor(J2.b) + 1, dtype=np.int64)
    excl = np.maximum(J1.a, 2 * m2 - X - 1.0)
    incl = np.minimum(J1.b, np.ceil(2 * m2 - X / 2.0) - 1.0)
    return int(_count_int_between(excl, incl).sum())


def phi_count(variant: int, X: int, j, n: Optional[int] = None) -> int:
    """Closed-form lattice count for the three shift equations."""
    if variant == 1:
        return int(_phi1_vec(np.int64(n), X, j))
    if variant == 2:
        return int(_phi2_vec(np.int64(n), X, j))
    if variant == 3:
        J1, J2 = j
        return phi3_count(X, J1, J2)
    raise ValueError(f"unknown variant {variant}")


def _residue_primes(pt: PrimeTable, J: IntervalJ, prog: Progression) -> np.ndarray:
    p = pt.primes_in(J.a, J.b)
    return p[p % prog.d == prog.l % prog.d]


def i_sum(
    variant: int,
    X: int,
    j,
    tables: Tables,
    n: Optional[int] = None,
    prog: Optional[Progression] = None,
    pair: Optional[ProgressionPair] = None,
) -> float:
    """Log-weighted prime count for the shift equations, with the congruence
    and interval constraints on the designated variable(s)."""
    pt = tables.pt
    if variant in (1, 2):
        out = []
        for p2 in _residue_primes(pt, j, prog):
            p2 = int(p2)
            p1 = 2 * p2 - n if variant == 1 else n - p2
            if X / 2 < p1 <= X and p1 in pt:
                out.append(math.log(p1) * math.log(p2))
        return math.fsum(out)
    if variant == 3:
        J1, J2 = j
        p1s = _residue_primes(pt, J1, Progression(pair.d1, pair.l1)).astype(np.int64)
        if len(p1s) == 0:
            return 0.0
        lp1 = np.log(p1s.astype(np.float64))
        parts = []
        for p2 in _residue_primes(pt, J2, Progression(pair.d2, pair.l2)):
            p2 = int(p2)
            p3 = 2 * p2 - p1s
            ok = (p3 > X / 2) & (p3 <= X)
            ok[ok] = pt.is_prime[p3[ok]]
            if ok.any():
                parts.append(
                    math.log(p2) * float(np.sum(lp1[ok] * np.log(p3[ok].astype(np.float64))))
                )
        return math.fsum(parts)
    raise ValueError(f"unknown variant {variant}")


def delta_record(
    variant: int,
    X: int,
    j,
    tables: Tables,
    sigma0_val: float,
    n: Optional[int] = None,
    prog: Optional[Progression] = None,
    pair: Optional[ProgressionPair] = None,
) -> DiscrepancyRecord:
    """One discrepancy evaluation: I minus the density-normalized lattice count."""
    if variant in (1, 2):
        i_val = i_sum(variant, X, j, tables, n=n, prog=prog)
        phi_val = phi_count(variant, X, j, n=n)
        sig = sigma_lag if variant == 1 else sigma_dl
        local = sig(n, prog, tables.ft).value(sigma0_val)
        norm = phi(prog.d, tables.ft)
        return DiscrepancyRecord(
            variant, (prog.d,), (prog.l,), n, (j.a, j.b),
            i_val, phi_val, local, i_val - local / norm * phi_val,
        )
    J1, J2 = j
    i_val = i_sum(3, X, j, tables, pair=pair)
    phi_val = phi3_count(X, J1, J2)
    local = sigma3(pair, tables.ft).value(sigma0_val)
    norm = phi(pair.d1, tables.ft) * phi(pair.d2, tables.ft)
    return DiscrepancyRecord(
        3, (pair.d1, pair.d2), (pair.l1, pair.l2), None,
        (J1.a, J1.b, J2.a, J2.b),
        i_val, phi_val, local, i_val - local / norm * phi_val,
    )


# ---------------------------------------------------------------------------
# worst-case aggregates


def _lam_float_array(limit: int, pt: PrimeTable) -> np.ndarray:
    """lam[n] = prod over odd primes p | n of (p-1)/(p-2), as floats."""
    lam = np.ones(limit + 1)
    for p in pt.primes_in(2, limit):
        p = int(p)
        lam[p::p] *= (p - 1.0) / (p - 2.0)
    return lam


def _coprime_residues(d: int) -> list[int]:
    return [l for l in range(1, d + 1) if math.gcd(d, l) == 1]


def bv_aggregate(
    variant: int,
    X: int,
    d_max: int,
    tables: Tables,
    sigma0_val: float,
    j_descriptor: str = "full+halves+quarters",
    seed: int = 0,
) -> BvResult:
    """Sum over moduli d <= d_max of the worst case, over residues and sampled
    intervals, of the summed absolute discrepancy over all shifts."""
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    pt, ft = tables.pt, tables.ft
    N = 2 * X
    if pt.limit < N:
        raise ValueError("prime table must cover 2X")
    half, lp = _range_primes(X, pt)
    lam = _lam_float_array(N, pt)
    narr = np.arange(N + 1, dtype=np.int64)
    even = narr % 2 == 0
    js = build_j_family(X, j_descriptor, seed)
    total_lemma = 0.0
    total_nat = 0.0
    for d in range(1, d_max + 1):
        d_primes = [p for p, _ in ft.factorize(d)] if d > 1 else []
        lam_nd = lam.copy()
        for q in d_primes:
            if q > 2:
                f = (q - 1.0) / (q - 2.0)
                lam_nd *= f
                lam_nd[q::q] /= f
        dphi = phi(d, ft)
        best_lemma = 0.0
        best_nat = 0.0
        for l in _coprime_residues(d):
            cop = np.ones(N + 1, dtype=bool)
            if variant == 1:
                # forced residue of p1 is 2l - n; and 2 p2 - p1 = n needs odd n
                for q in d_primes:
                    cop &= (2 * l - narr) % q != 0
                parity = ~even
            else:
                for q in d_primes:
                    cop &= (narr - l) % q != 0
                parity = even
            scoef = np.where(parity & cop, sigma0_val * lam_nd, 0.0) / dphi
            p2_res = half % d == l % d
            for J in js:
                sel = p2_res & (half > J.a) & (half <= J.b)
                p2s = half[sel]
                lp2 = lp[sel]
                i_arr = np.zeros(N + 1)
                if len(p2s):
                    if variant == 1:
                        for p1, w in zip(half, lp):
                            i_arr[2 * p2s - p1] += w * lp2
                    else:
                        for p1, w in zip(half, lp):
                            i_arr[p1 + p2s] += w * lp2
                phi_arr = _phi1_vec(narr, X, J) if variant == 1 else _phi2_vec(narr, X, J)
                absdelta = np.abs(i_arr - scoef * phi_arr)
                best_lemma = max(best_lemma, float(absdelta[1 : X + 1].sum()))
                best_nat = max(best_nat, float(absdelta[1:].sum()))
        total_lemma += best_lemma
        total_nat += best_nat
    return BvResult(total_lemma / X**2, total_nat / X**2, X, d_max, len(js))


def bv3_aggregate(
    X: int,
    d_max: int,
    tables: Tables,
    sigma0_val: float,
    j_descriptor: str = "full+halves",
    seed: int = 0,
) -> BvResult:
    """Double-modulus analogue: sum over (d1, d2) of the worst single
    discrepancy over residues and sampled interval pairs."""
    pt, ft = tables.pt, tables.ft
    half, lp = _range_primes(X, pt)
    p3m = 2 * half[None, :] - half[:, None]  # rows: p1 index, cols: p2 index
    inb = (p3m > X / 2) & (p3m <= X)
    safe = np.where(inb, p3m, 2)
    pmask = inb & pt.is_prime[safe]
    logs3 = np.where(pmask, np.log(np.where(pmask, safe, 1).astype(np.float64)), 0.0)
    m = np.where(pmask, lp[:, None] * lp[None, :] * logs3, 0.0)
    js = build_j_family(X, j_descriptor, seed)
    phi3 = {(a, b): phi3_count(X, js[a], js[b]) for a in range(len(js)) for b in range(len(js))}

    def sel_mask(d, l, J):
        return (half % d == l % d) & (half > J.a) & (half <= J.b)

    # column reductions, one per (d2, l2, J2) combination
    col_sums = {}
    for d2 in range(1, d_max + 1):
        for l2 in _coprime_residues(d2):
            for bj, J2 in enumerate(js):
                cols = sel_mask(d2, l2, J2)
                col_sums[(d2, l2, bj)] = m[:, cols].sum(axis=1)

    total = 0.0
    for d1 in range(1, d_max + 1):
        phi1 = phi(d1, ft)
        for d2 in range(1, d_max + 1):
            norm = phi1 * phi(d2, ft)
            best = 0.0
            for l1 in _coprime_residues(d1):
                for l2 in _coprime_residues(d2):
                    s3 = sigma3(ProgressionPair(d1, l1, d2, l2), ft).value(sigma0_val)
                    for aj, J1 in enumerate(js):
                        rows = sel_mask(d1, l1, J1)
                        for bj in range(len(js)):
                            i3 = float(col_sums[(d2, l2, bj)][rows].sum())
                            delta = i3 - s3 / norm * phi3[(aj, bj)]
                            best = max(best, abs(delta))
            total += best
    return BvResult(total / X**2, total / X**2, X, d_max, len(js))


# ---------------------------------------------------------------------------
# character-cancellation statistics


def hooley_window(X: int, omega: float) -> Window:
    root, lx = math.sqrt(X), math.log(X)
    return Window.between(root * lx**-omega, root * lx**omega)


def hooley_sum(X: int, window: Window, power: int, tables: Tables) -> int:
    """Sum over p <= X of |sum of chi4(d) over divisors d of p-1 in the window|^power."""
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    total = 0
    for p in tables.pt.primes_in(0, X):
        inner = sum(chi4(d) for d in tables.ft.divisors(int(p) - 1) if window.contains(d))
        total += abs(inner) ** power
    return total


def window_prime_set(X: int, window: Window, tables: Tables) -> np.ndarray:
    """Primes p <= X such that p - 1 has a divisor in the window."""
    out = [
        int(p)
        for p in tables.pt.primes_in(0, X)
        if any(window.contains(d) for d in tables.ft.divisors(int(p) - 1))
    ]
    return np.array(out, dtype=np.int64)


def tolev_count(n: int, X: int, window: Window, equation: str, tables: Tables) -> int:
    """Solutions of p1 + p2 = n (goldbach) or 2 p1 - p2 = n (ap) with p1 in the
    window prime set; p2 only needs to be prime."""
    if not 1 <= n <= X:
        raise ValueError("need 1 <= n <= X")
    if equation not in ("goldbach", "ap"):
        raise ValueError("equation must be 'goldbach' or 'ap'")
    if equation == "ap" and tables.pt.limit < 2 * X - n:
        raise ValueError("prime table too small for the ap equation")
    count = 0
    for p1 in window_prime_set(X, window, tables):
        p2 = n - int(p1) if equation == "goldbach" else 2 * int(p1) - n
        if p2 >= 2 and p2 in tables.pt:
            count += 1
    return count


# ---------------------------------------------------------------------------
# modulus double sum and the headline ratio


def gamma_partial(
    D: int,
    ft: FactorTable,
    sigma0_val: float,
    budget: int = 2000,
    force: bool = False,
) -> float:
    """Finite double sum over odd moduli d1, d2 <= D of
    chi4(d1) chi4(d2) / (phi(d1) phi(d2)) times the triple local density."""
    if D > budget and not force:
        raise BudgetError(f"modulus bound {D} exceeds budget {budget}")
    odd = range(1, D + 1, 2)
    coef = {}
    parts = {}
    for d in odd:
        coef[d] = chi4(d) / phi(d, ft)
        parts[d] = frozenset(p for p, _ in ft.factorize(d) if p > 2)

    def dens(s):
        out = 1.0
        for q in s:
            out *= (q - 1.0) / (q - 2.0)
        return out

    total = math.fsum(
        coef[d1] * coef[d2] * dens(parts[d1] & parts[d2]) for d1 in odd for d2 in odd
    )
    return sigma0_val * total


@dataclass
class RatioResult:
    x: int
    count: float
    main_term: float
    ratio: float


def main_term_ratio(cfg: RunConfig, tables: Tables) -> RatioResult:
    """Observed triple sum against (1/8) * singular series * X^2."""
    count = r_of_x(cfg, include_degenerate=True, tables=tables).value
    sr = products.triple_series(cfg.euler_cutoff).value
    main = sr * cfg.x**2 / 8.0
    return RatioResult(cfg.x, count, main, count / main)
