"""Dirichlet characters, Ramanujan sums and the twisted Gauss-type sums ``C_chi(a, q)``.

A character is stored by its discrete-log exponents on the cyclic factors of
``(Z/qZ)^*``.  Its value at a unit ``n`` is ``exp(2 pi i L(n) / e)`` where
``e`` is the exponent of the unit group and ``L(n)`` an exact integer, so
products of characters stay exact until they are rendered as complex numbers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .arith import divisors, factorize, mobius, mobius_table, phi_table

TWO_PI = 2.0 * math.pi


def _primitive_root(p: int) -> int:
    if p == 2:
        return 1
    qs = [r for r, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in qs):
            return g
    raise AssertionError("no primitive root found")  # unreachable for prime p


@dataclass(frozen=True)
class _Cyclic:
    modulus: int  # the prime power this factor lives on
    order: int
    logs: np.ndarray = field(repr=False)  # discrete log of each residue, -1 off the factor's units


def _cyclic_factors(p: int, a: int) -> list[_Cyclic]:
    m = p**a
    if p == 2:
        if a == 1:
            logs = np.array([-1, 0], dtype=np.int64)
            return [_Cyclic(2, 1, logs)]
        if a == 2:
            return [_Cyclic(4, 2, np.array([-1, 0, -1, 1], dtype=np.int64))]
        # (Z/2^a)^* = <-1> x <5>
        half = m >> 2
        sign = np.full(m, -1, dtype=np.int64)
        five = np.full(m, -1, dtype=np.int64)
        r = 1
        for t in range(half):
            sign[r], five[r] = 0, t
            sign[m - r], five[m - r] = 1, t
            r = r * 5 % m
        return [_Cyclic(m, 2, sign), _Cyclic(m, half, five)]
    g = _primitive_root(p)
    if a > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    order = m - m // p
    logs = np.full(m, -1, dtype=np.int64)
    r = 1
    for t in range(order):
        logs[r] = t
        r = r * g % m
    return [_Cyclic(m, order, logs)]


class UnitGroup:
    """Cyclic decomposition of ``(Z/qZ)^*`` with per-residue discrete logs."""

    def __init__(self, q: int):
        if q < 1:
            raise ValueError("modulus must be a positive integer")
        self.q = q
        self.factors: list[_Cyclic] = []
        for p, a in factorize(q) if q > 1 else []:
            self.factors.extend(_cyclic_factors(p, a))
        self.orders = tuple(c.order for c in self.factors)
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        residues = np.arange(q, dtype=np.int64)
        if self.factors:
            self.logs = np.stack([c.logs[residues % c.modulus] for c in self.factors])
            self.unit_mask = (self.logs >= 0).all(axis=0)
        else:
            self.logs = np.zeros((0, 1), dtype=np.int64)
            self.unit_mask = np.ones(1, dtype=bool)
        self.units = np.flatnonzero(self.unit_mask)
        self.phi = int(self.units.size)


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A Dirichlet character modulo ``modulus``.

    ``exponents[i]`` fixes the image of the ``i``-th cyclic generator of the
    unit group; all zeros is the principal character.
    """

    modulus: int
    index: int
    exponents: tuple[int, ...]
    group: UnitGroup = field(repr=False)

    @property
    def principal(self) -> bool:
        return not any(self.exponents)

    @property
    def order_bound(self) -> int:
        """Exponent of the unit group; every value is an ``order_bound``-th root of unity."""
        return self.group.exponent

    @cached_property
    def log_values(self) -> np.ndarray:
        """Integer ``L(n)`` with ``chi(n) = e(L(n) / order_bound)``, or -1 off the units."""
        g = self.group
        e = g.exponent
        acc = np.zeros(self.modulus, dtype=np.int64)
        for j, order, logs in zip(self.exponents, g.orders, g.logs):
            if j:
                acc += j * (e // order) * logs
        acc %= e
        acc[~g.unit_mask] = -1
        acc.flags.writeable = False
        return acc

    @cached_property
    def values(self) -> np.ndarray:
        lv = self.log_values
        out = np.exp(1j * TWO_PI * lv / self.group.exponent)
        out[lv < 0] = 0.0
        out.flags.writeable = False
        return out

    def __call__(self, n):
        return self.values[np.asarray(n, dtype=np.int64) % self.modulus]

    def conj(self, n):
        return np.conj(self(n))


@lru_cache(maxsize=256)
def characters_mod(q: int) -> tuple[DirichletCharacter, ...]:
    """All ``phi(q)`` characters mod ``q``; index 0 is the principal one."""
    if q < 1:
        raise ValueError("modulus must be a positive integer")
    if q > 10**6:
        raise ValueError("modulus above 10^6 not supported")
    g = UnitGroup(q)
    exps = itertools.product(*(range(o) for o in g.orders))
    return tuple(DirichletCharacter(q, i, tuple(e), g) for i, e in enumerate(exps))


def character_table(q: int) -> np.ndarray:
    """``phi(q) x q`` matrix of character values, rows ordered by character index."""
    chars = characters_mod(q)
    g = chars[0].group
    if not g.factors:
        return np.ones((1, q), dtype=complex)
    e = g.exponent
    scale = np.array([e // o for o in g.orders], dtype=np.int64)
    exps = np.array([c.exponents for c in chars], dtype=np.int64) * scale
    logs = np.where(g.unit_mask, g.logs, 0)
    out = np.exp(1j * TWO_PI * ((exps @ logs) % e) / e)
    out[:, ~g.unit_mask] = 0.0
    return out


def ramanujan_sum(q: int, h: int) -> int:
    """``c_q(h) = sum_{d | (q, h)} mu(q/d) d``."""
    if q < 1:
        raise ValueError("q must be positive")
    g = math.gcd(q, h)
    return sum(mobius(q // d) * d for d in divisors(g))


def ramanujan_sum_direct(q: int, h: int) -> complex:
    """``sum_{(a, q) = 1} e(a h / q)`` by brute force."""
    a = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64)
    return complex(np.exp(1j * TWO_PI * ((a * h) % q) / q).sum())


def ramanujan_sums_upto(h: int, N: int) -> np.ndarray:
    """``c_q(h)`` for ``0 <= q <= N`` (index 0 unused), from the divisor formula."""
    out = np.zeros(N + 1, dtype=np.int64)
    if N < 1:
        return out
    if h == 0:
        out[1:] = phi_table(N)[1:]
        return out
    mu = mobius_table(N)
    for d in divisors(abs(h)):
        if d > N:
            break
        # every q = d m picks up mu(m) d
        m_max = N // d
        out[d : d * m_max + 1 : d] += d * mu[1 : m_max + 1]
    return out


def gauss_type_sum(chi: DirichletCharacter, a: int, q1: int) -> complex:
    """``C_chi(a, q1) = sum_{l mod q1, (l, q1) = 1} e(a l / q1) conj(chi(l))``."""
    if chi.modulus != q1:
        raise ValueError(f"character modulus {chi.modulus} does not match q1={q1}")
    units = chi.group.units
    e = chi.group.exponent
    # combine both phases as one exact rational angle
    num = ((a * units) % q1) * e - chi.log_values[units] * q1
    den = q1 * e
    return complex(np.exp(1j * TWO_PI * (num % den) / den).sum())


def orthogonality_check(q: int, r: int, n: int) -> complex:
    """``sum_{chi mod q} conj(chi(r)) chi(n)``."""
    table = character_table(q)
    return complex(np.sum(np.conj(table[:, r % q]) * table[:, n % q]))
