"""Windowed prime sieves and multiplicative functions.

Everything here works on integer windows ``[start, start + length)``.  A window
is factored once by a segmented sieve and the result is stored in compressed
row form (one row of ``(prime, exponent)`` pairs per integer), so that
``d_k``, ``Omega`` and prime-factor window counts can be evaluated for a whole
window with a handful of numpy reductions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

INT64_MAX = int(np.iinfo(np.int64).max)

# base primes above this bound mean windows far beyond desk scale
MAX_BASE_PRIME = 2 * 10**8

Factorization = Sequence[tuple[int, int]]


class SieveInfeasible(RuntimeError):
    """Raised when a requested sieve exceeds the supported resource envelope."""


@lru_cache(maxsize=8)
def _prime_array(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for i in range(3, math.isqrt(n) + 1, 2):
        if is_prime[i]:
            is_prime[i * i :: 2 * i] = False
    primes = np.flatnonzero(is_prime).astype(np.int64)
    primes.flags.writeable = False
    return primes


def primes_up_to(n: int) -> list[int]:
    """All primes ``p <= n``."""
    if n > MAX_BASE_PRIME:
        raise SieveInfeasible(f"prime sieve up to {n} exceeds {MAX_BASE_PRIME}")
    return _prime_array(int(n)).tolist()


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Complete factorizations of every integer in ``[window_start, window_start + window_length)``.

    Row ``i`` (the integer ``window_start + i``) owns the slice
    ``offsets[i]:offsets[i + 1]`` of ``primes`` and ``exponents``; primes in a
    row are strictly increasing.
    """

    window_start: int
    window_length: int
    offsets: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)
    exponents: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.window_length

    @property
    def numbers(self) -> np.ndarray:
        return np.arange(self.window_start, self.window_start + self.window_length, dtype=np.int64)

    @property
    def row_ids(self) -> np.ndarray:
        """Row index of every stored ``(prime, exponent)`` pair."""
        return np.repeat(np.arange(self.window_length), np.diff(self.offsets))

    def factorization(self, n: int) -> list[tuple[int, int]]:
        i = n - self.window_start
        if not 0 <= i < self.window_length:
            raise IndexError(f"{n} outside window starting at {self.window_start}")
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return list(zip(self.primes[lo:hi].tolist(), self.exponents[lo:hi].tolist()))

    @property
    def factorizations(self) -> list[list[tuple[int, int]]]:
        return [self.factorization(n) for n in range(self.window_start, self.window_start + self.window_length)]


@dataclass(frozen=True, eq=False)
class DivisorVector:
    """Values of an arithmetic function on ``[window_start, window_start + len(values))``."""

    window_start: int
    k: int
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @property
    def window_end(self) -> int:
        return self.window_start + len(self.values)

    def at(self, n):
        """Value(s) at integer(s) ``n``; raises if any ``n`` is outside the window."""
        idx = np.asarray(n, dtype=np.int64) - self.window_start
        if np.any(idx < 0) or np.any(idx >= len(self.values)):
            raise IndexError("requested integers are outside the window")
        return self.values[idx]

    def covers(self, lo: int, hi: int) -> bool:
        """True if every integer in ``[lo, hi]`` is inside the window."""
        return self.window_start <= lo and hi < self.window_end


def sieve_window(start: int, length: int) -> FactorTable:
    """Factor every integer in ``[start, start + length)`` with a segmented sieve.

    Base primes run up to ``isqrt(start + length - 1)``; whatever survives
    division by all of them is a single large prime.
    """
    start, length = int(start), int(length)
    if length < 1:
        raise ValueError("window length must be at least 1")
    if start < 1:
        raise ValueError("window must start at a positive integer")
    end = start + length
    if end - 1 > INT64_MAX:
        raise OverflowError("window end exceeds 64-bit range")
    root = math.isqrt(end - 1)
    if root > MAX_BASE_PRIME:
        raise SieveInfeasible(f"base primes up to {root} required")
    base = _prime_array(root)

    rem = np.arange(start, end, dtype=np.int64)
    rows, ps, es = [], [], []

    n_small = int(np.searchsorted(base, length, side="right"))
    for p in base[:n_small].tolist():
        idx = np.arange((-start) % p, length, p)
        if idx.size == 0:
            continue
        vals = rem[idx]
        exps = np.zeros(idx.size, dtype=np.int64)
        live = np.ones(idx.size, dtype=bool)
        while live.any():
            vals[live] //= p
            exps[live] += 1
            live &= vals % p == 0
        rem[idx] = vals
        rows.append(idx)
        ps.append(np.full(idx.size, p, dtype=np.int64))
        es.append(exps)

    # primes larger than the window hit it at most once each
    large = base[n_small:]
    if large.size:
        first = (-start) % large
        hit = first < length
        idx, p = first[hit], large[hit]
        if idx.size:
            np.floor_divide.at(rem, idx, p)
            exps = np.ones(idx.size, dtype=np.int64)
            while True:
                more = rem[idx] % p == 0
                if not more.any():
                    break
                np.floor_divide.at(rem, idx[more], p[more])
                exps[more] += 1
            rows.append(idx)
            ps.append(p)
            es.append(exps)

    left = np.flatnonzero(rem > 1)
    rows.append(left)
    ps.append(rem[left])
    es.append(np.ones(left.size, dtype=np.int64))

    rows_all = np.concatenate(rows)
    order = np.argsort(rows_all, kind="stable")
    primes = np.concatenate(ps)[order]
    exponents = np.concatenate(es)[order]
    counts = np.bincount(rows_all, minlength=length)
    offsets = np.zeros(length + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    for arr in (offsets, primes, exponents):
        arr.flags.writeable = False
    return FactorTable(start, length, offsets, primes, exponents)


class _SmallFactorCache:
    """Factor table over ``[1, limit]`` grown on demand, for moduli-sized integers."""

    ceiling = 1 << 24

    def __init__(self):
        self.table: FactorTable | None = None

    def get(self, n: int) -> list[tuple[int, int]] | None:
        if n > self.ceiling:
            return None
        if self.table is None or n > self.table.window_length:
            limit = min(self.ceiling, max(1 << 16, 2 * n))
            self.table = sieve_window(1, limit)
        return self.table.factorization(n)


_small_factors = _SmallFactorCache()


def factorize(n: int) -> list[tuple[int, int]]:
    """Factorization of a single positive integer, via the window sieve."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    f = _small_factors.get(n)
    if f is None:
        f = sieve_window(n, 1).factorization(n)
    return f


def divisor_k(factorization: Factorization, k: int) -> int:
    """``d_k(n) = prod binom(e + k - 1, k - 1)``, refusing to exceed 64 bits."""
    if k < 1:
        raise ValueError("k must be at least 1")
    out = 1
    for _, e in factorization:
        out *= math.comb(e + k - 1, k - 1)
        if out > INT64_MAX:
            raise OverflowError("d_k(n) does not fit in 64 bits")
    return out


def big_omega(factorization: Factorization) -> int:
    return sum(e for _, e in factorization)


def count_prime_factors_in_range(factorization: Factorization, P: float, Q: float,
                                 with_multiplicity: bool = True) -> int:
    """Number of prime factors ``p`` of ``n`` with ``P <= p <= Q``."""
    if P > Q:
        raise ValueError("empty range: P > Q")
    return sum((e if with_multiplicity else 1) for p, e in factorization if P <= p <= Q)


def _binomial_column(max_e: int, k: int) -> np.ndarray:
    col = [math.comb(e + k - 1, k - 1) for e in range(max_e + 1)]
    if col[-1] > INT64_MAX:
        raise OverflowError("d_k(p^e) does not fit in 64 bits")
    return np.array(col, dtype=np.int64)


def divisor_k_window(table: FactorTable, k: int) -> DivisorVector:
    """``d_k`` over a factored window, with overflow detection."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = table.window_length
    out = np.ones(n, dtype=np.int64)
    if k == 1 or table.primes.size == 0:
        return DivisorVector(table.window_start, k, out)
    local = _binomial_column(int(table.exponents.max()), k)[table.exponents]
    bits = np.bincount(table.row_ids, weights=np.log2(local), minlength=n)
    if bits.max() >= 62.5:
        bad = table.window_start + int(bits.argmax())
        raise OverflowError(f"d_{k}({bad}) does not fit in 64 bits")
    counts = np.diff(table.offsets)
    nonempty = counts > 0
    out[nonempty] = np.multiply.reduceat(local, table.offsets[:-1][nonempty])
    return DivisorVector(table.window_start, k, out)


def big_omega_window(table: FactorTable) -> np.ndarray:
    return np.bincount(table.row_ids, weights=table.exponents,
                       minlength=table.window_length).astype(np.int64)


def count_in_range_window(table: FactorTable, P: float, Q: float,
                          with_multiplicity: bool = True) -> np.ndarray:
    """Per-row count of prime factors in ``[P, Q]``."""
    if P > Q:
        raise ValueError("empty range: P > Q")
    primes = table.primes.astype(np.float64)
    inside = (primes >= P) & (primes <= Q)
    weights = np.where(inside, table.exponents if with_multiplicity else 1, 0)
    return np.bincount(table.row_ids, weights=weights,
                       minlength=table.window_length).astype(np.int64)


# small-modulus helpers used by the character and singular-series code

def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n):
        out = [d * p**j for d in out for j in range(e + 1)]
    return sorted(out)


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = 1
    for p, e in factorize(n):
        out *= (p - 1) * p ** (e - 1)
    return out


def mobius_table(N: int) -> np.ndarray:
    """``mu(n)`` for ``0 <= n <= N`` (``mu(0)`` stored as 0)."""
    mu = np.zeros(N + 1, dtype=np.int64)
    if N < 1:
        return mu
    t = sieve_window(1, N)
    sq_free = np.bincount(t.row_ids, weights=(t.exponents > 1), minlength=N) == 0
    omega = np.diff(t.offsets)
    mu[1:] = np.where(sq_free, np.where(omega % 2 == 1, -1, 1), 0)
    return mu


def phi_table(N: int) -> np.ndarray:
    """Euler's totient for ``0 <= n <= N`` (``phi(0)`` stored as 0)."""
    phi = np.arange(N + 1, dtype=np.int64)
    for p in _prime_array(N).tolist():
        phi[p::p] -= phi[p::p] // p
    phi[0] = 0
    return phi


def is_valid_factorization(n: int, factorization: Iterable[tuple[int, int]]) -> bool:
    prod, last = 1, 1
    for p, e in factorization:
        if p <= last or e < 1:
            return False
        prod *= p**e
        last = p
    return prod == n
