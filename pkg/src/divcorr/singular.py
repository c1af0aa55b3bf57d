"""Euler-product coefficients, arc weights and the divisor-correlation singular series.

Notation:

* ``a_coeff(k, q0, q1)`` is the leading coefficient of the residue polynomial
  attached to ``sum_{(n, q1)=1} d_k(q0 n) n^{-s}``.
* ``arc_weight(k, q) = sum_{q0 q1 = q} mu(q1) a_coeff(k, q0, q1) / (q0 phi(q1))``.
* ``singular_series(h, k, l, Q) = sum_{q <= Q} c_q(h) w_k(q) w_l(q)`` plus a
  certified bound on the discarded tail.

``(k-1)! w_k`` is multiplicative in ``q``.  With ``x = 1/p`` and
``M ~ NegBin(k, x)`` (failures before the ``k``-th success) the local factor at
``p^e`` is ``P(M >= e) - (1-x)^(k-1) d_k(p^(e-1)) x^e``, which collapses to
``1 - (1-x)^(k-1)`` at ``e = 1`` and to ``x^e`` for every ``e`` when ``k = 2``.  The vectorised table and the tail constant
are built from that form; ``arc_weight`` keeps the literal divisor sum so the
two can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import (
    _prime_array,
    divisor_k,
    divisors,
    euler_phi,
    factorize,
    mobius,
    sieve_window,
)
from .characters import ramanujan_sums_upto

DEFAULT_EPS = 0.1


@lru_cache(maxsize=None)
def _tail_series(k: int, p: int, i: int) -> Fraction:
    """``sum_{j >= 0} d_k(p^(i+j)) / p^j`` in closed form."""
    x = Fraction(1, p)
    head = sum(math.comb(m + k - 1, k - 1) * x**m for m in range(i))
    return ((1 - x) ** -k - head) / x**i


@lru_cache(maxsize=1 << 16)
def a_coeff(k: int, q0: int, q1: int, form: str = "residue") -> float:
    """Leading coefficient ``a_{k,q0,q1}`` of the residue polynomial.

    ``form="residue"`` takes the Euler product of ``sum_{(n, q1)=1} d_k(q0 n) n^-s``
    at face value: a prime dividing both ``q0`` and ``q1`` never divides ``n``,
    so its local factor is ``d_k(p^i)`` rather than the full series.
    ``form="shortcut"`` applies the series at every ``p | q0``; it only
    differs when ``(q0, q1) > 1``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if q0 < 1 or q1 < 1:
        raise ValueError("q0 and q1 must be positive")
    if form not in ("residue", "shortcut"):
        raise ValueError(f"unknown form {form!r}")
    out = Fraction(1, math.factorial(k - 1))
    f0 = dict(factorize(q0)) if q0 > 1 else {}
    p1 = {p for p, _ in factorize(q1)} if q1 > 1 else set()
    for p in set(f0) | p1:
        out *= (1 - Fraction(1, p)) ** k
    for p, i in f0.items():
        if form == "residue" and p in p1:
            out *= math.comb(i + k - 1, k - 1)
        else:
            out *= _tail_series(k, p, i)
    return float(out)


def arc_weight(k: int, q: int, form: str = "residue") -> float:
    """``w_k(q)`` by the literal sum over ``q = q0 q1``."""
    if q < 1:
        raise ValueError("q must be positive")
    total = 0.0
    for q1 in divisors(q):
        mu = mobius(q1)
        if mu:
            q0 = q // q1
            total += mu * a_coeff(k, q0, q1, form) / (q0 * euler_phi(q1))
    return total


def arc_weight_bound(k: int, q: int) -> float:
    """``sum_{q0 q1 = q} d_k(q0) / (q0 phi(q1))``, an upper bound for ``|w_k(q)|``."""
    return sum(divisor_k(factorize(q // q1) if q // q1 > 1 else [], k) / ((q // q1) * euler_phi(q1))
               for q1 in divisors(q))


def _negbin_tail_scaled(k: int, x: np.ndarray, e: int) -> np.ndarray:
    """``P(M >= e) / x^e`` for ``M ~ NegBin(k, x)``, summed until terms are negligible."""
    # term_j = C(e+j+k-1, k-1) x^j (1-x)^k
    term = math.comb(e + k - 1, k - 1) * (1.0 - x) ** k
    total = np.array(term, dtype=float)
    j = 0
    while True:
        j += 1
        m = e + j
        term = term * x * (m + k - 1) / m
        total = total + term
        if np.all(term <= 1e-18 * total):
            return total


def local_factor_scaled(k: int, p, e: int) -> np.ndarray:
    """``(k-1)! w_k(p^e) * p^e``, vectorised over primes ``p``.

    Equals ``P(M >= e) / x^e - (1-x)^(k-1) d_k(p^(e-1))``.  Scaling by ``p^e``
    keeps the values away from underflow for large ``e``.
    """
    x = 1.0 / np.asarray(p, dtype=float)
    if e == 0:
        return np.ones_like(x)
    if e == 1:
        return (1.0 - (1.0 - x) ** (k - 1)) / x
    return _negbin_tail_scaled(k, x, e) - (1.0 - x) ** (k - 1) * math.comb(e + k - 2, k - 1)


@lru_cache(maxsize=32)
def arc_weights(k: int, N: int) -> np.ndarray:
    """``w_k(q)`` for ``0 <= q <= N`` (index 0 unused), via the multiplicative form."""
    if k < 2:
        raise ValueError("k must be at least 2")
    out = np.zeros(N + 1)
    if N < 1:
        return out
    t = sieve_window(1, N)
    logs = np.zeros(t.primes.size)
    signs = np.ones(t.primes.size)
    for e in np.unique(t.exponents).tolist():
        sel = t.exponents == e
        ps = t.primes[sel]
        v = local_factor_scaled(k, ps, e) / ps.astype(float) ** e
        signs[sel] = np.sign(v)
        with np.errstate(divide="ignore"):
            logs[sel] = np.log(np.abs(v))
    rows = t.row_ids
    log_abs = np.bincount(rows, weights=logs, minlength=N)
    negs = np.bincount(rows, weights=(signs < 0), minlength=N)
    zero = np.bincount(rows, weights=(signs == 0), minlength=N) > 0
    vals = np.where(negs % 2 == 1, -1.0, 1.0) * np.exp(log_abs) / math.factorial(k - 1)
    vals[zero] = 0.0
    out[1:] = vals
    out.flags.writeable = False
    return out


def _local_bound_scaled(k: int, p: float, e: int) -> float:
    """Upper bound for ``|local_factor_scaled(k, p, e)|``, valid for primes ``p >= k + 3``."""
    if e == 1:
        return float(k - 1)
    a = lambda m: math.comb(m + k - 1, k - 1)  # noqa: E731
    # a(m+1)/a(m) <= (k+3)/4 for m >= 3, so past e+1 the series is dominated by 2 a(e+1)
    return math.comb(e + k - 2, k - 2) + (a(e) + 2 * a(e + 1)) / p


def _settled(k: int, l: int, p: float, e: int, eps: float) -> bool:
    """True when, for this ``p``, every exponent ``>= e`` has local product ``<= 1``.

    Each explicit bound grows by at most ``(e + k) / (e + 1)`` per step in ``e``
    and that ratio decreases, so once the product of ratios is below ``p^eps``
    the bounded sequence is decreasing from ``e`` on.
    """
    b = _local_bound_scaled(k, p, e) * _local_bound_scaled(l, p, e) * p ** (-e * eps)
    if b > 1.0 or e < 2:
        return False
    growth = ((e + k) / (e + 1)) * ((e + l) / (e + 1))
    return growth < p**eps


@lru_cache(maxsize=64)
def tail_constant(k: int, l: int, eps: float = DEFAULT_EPS) -> float:
    """Explicit ``C`` with ``|w_k(q) w_l(q)| <= C q^(eps - 2)`` for every ``q``.

    ``q^(2-eps) |w_k w_l|`` is multiplicative, so ``C`` is the product over
    primes of the worst local factor.  Exact local factors are used up to the
    prime beyond which the explicit bounds keep every factor at most one.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")

    def bound_ok(p: float) -> bool:
        e = 1
        while True:
            if e == 1:
                if (k - 1) * (l - 1) * p ** (-eps) > 1.0:
                    return False
            elif _settled(k, l, p, e, eps):
                return True
            elif _local_bound_scaled(k, p, e) * _local_bound_scaled(l, p, e) * p ** (-e * eps) > 1.0:
                return False
            e += 1
            if e > 10_000:
                return False

    cutoff = float(max(k, l) + 3)
    while not bound_ok(cutoff):
        cutoff *= 1.25
    # bounds are monotone in p, so every prime above the cutoff contributes at most 1
    log_c = -(math.lgamma(k) + math.lgamma(l))
    lo, hi = 1, min(int(cutoff) + 1, 1 << 16)
    while lo <= int(cutoff):
        primes = _prime_array(hi)
        for p in primes[primes > lo].tolist():
            best, e = 1.0, 1
            while True:
                val = abs(float(local_factor_scaled(k, p, e)) * float(local_factor_scaled(l, p, e))) * p ** (-e * eps)
                best = max(best, val)
                if e >= 2 and _settled(k, l, p, e, eps):
                    break
                e += 1
                if e > 100_000:
                    raise RuntimeError(f"local factor search did not settle at p={p}")
            log_c += math.log(best)
            # every factor is at least one, so once past overflow the constant is infinite
            if log_c > 709.0:
                return math.inf
        lo, hi = hi, min(2 * hi, int(cutoff) + 1)
    return math.exp(log_c)


def tail_majorant(h: int, q_trunc: int, eps: float = DEFAULT_EPS) -> float:
    """Upper bound for ``sum_{q > q_trunc} q^(eps-2) sum_{d | (q, h)} d``."""
    s = 2.0 - eps
    total = 0.0
    for d in divisors(abs(h)):
        m0 = q_trunc // d + 1
        # sum_{m >= m0} m^-s <= m0^-s + m0^(1-s)/(s-1)
        total += d ** (-1.0 + eps) * (m0 ** (-s) + m0 ** (1.0 - s) / (s - 1.0))
    return total


def _local_weight(k: int, p: int, e: int) -> float:
    return float(local_factor_scaled(k, p, e)) / (p**e * math.factorial(k - 1))


@lru_cache(maxsize=256)
def _generic_log_terms(k: int, l: int, delta: float, exact_primes: int):
    """Per-prime ``log(1 + |w_k(p) w_l(p)| p^delta)``: the local factor when ``p`` does not divide ``h``.

    There ``|c_p(h)| = 1`` and ``c_{p^e}(h) = 0`` for ``e >= 2``.
    """
    ps = _prime_array(exact_primes)
    x = 1.0 / ps.astype(float)
    wk = (1.0 - (1.0 - x) ** (k - 1)) / math.factorial(k - 1)
    wl = (1.0 - (1.0 - x) ** (l - 1)) / math.factorial(l - 1)
    terms = np.log1p(np.abs(wk * wl) * ps.astype(float) ** delta)
    terms.flags.writeable = False
    return ps, terms, math.fsum(terms.tolist())


def rankin_tail_bound(h: int, k: int, l: int, q_trunc: int, delta: float,
                      exact_primes: int = 10**6) -> float:
    """``q_trunc^-delta * prod_p sum_e |c_{p^e}(h) w_k(p^e) w_l(p^e)| p^(e delta)``.

    Every term of the series beyond ``q_trunc`` is at most ``(q / q_trunc)^delta``
    times itself, so the Euler product of the weighted absolute series bounds the
    tail.  Primes up to ``exact_primes`` (and every prime dividing ``h``) are
    handled exactly; the remaining factors are ``1 + |w_k(p) w_l(p)| p^delta``
    with ``|w_k(p)| <= (k-1)/p / (k-1)!``, bounded by an integral.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    h = abs(h)
    fh = dict(factorize(h)) if h > 1 else {}
    ps, terms, total = _generic_log_terms(k, l, delta, exact_primes)
    # drop the generic factor of every prime dividing h, then add its exact one
    hit = [i for i in np.searchsorted(ps, list(fh)).tolist() if i < ps.size and ps[i] in fh]
    log_prod = total - math.fsum(terms[hit].tolist())
    for p, a in fh.items():
        local = 1.0
        for e in range(1, a + 2):
            c = (p**e - p ** (e - 1)) if e <= a else p**a
            local += c * abs(_local_weight(k, p, e) * _local_weight(l, p, e)) * p ** (e * delta)
        log_prod += math.log(local)
    P = float(exact_primes)
    cst = (k - 1) * (l - 1) / (math.factorial(k - 1) * math.factorial(l - 1))
    log_prod += cst * (P ** (delta - 1.0) / (1.0 - delta) + P ** (delta - 2.0))
    return math.exp(log_prod - delta * math.log(q_trunc))


def certified_tail(h: int, k: int, l: int, q_trunc: int, eps: float = DEFAULT_EPS) -> tuple[float, str]:
    """Smaller of the ``q^(eps-2)`` majorant and the best Rankin bound, with its label."""
    majorant = tail_constant(k, l, eps) * tail_majorant(h, q_trunc, eps)
    best, rule = majorant, "majorant"
    for delta in np.linspace(0.05, 0.95, 19).tolist():
        b = rankin_tail_bound(h, k, l, q_trunc, delta)
        if b < best:
            best, rule = b, f"rankin(delta={delta:.2f})"
    return best, rule


@dataclass(frozen=True)
class SingularSeriesValue:
    h: int
    k: int
    l: int
    q_trunc: int
    value: float
    tail_bound: float
    tail_rule: str = "majorant"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SingularSeriesValue":
        return cls(**d)


def singular_series(h: int, k: int, l: int, q_trunc: int,
                    eps: float = DEFAULT_EPS) -> SingularSeriesValue:
    """Truncated ``c_{h,k,l}`` and a bound on ``|c_{h,k,l} - value|``."""
    if h == 0:
        raise ValueError("h must be nonzero")
    if q_trunc < 1:
        raise ValueError("q_trunc must be at least 1")
    if k < 2 or l < 2:
        raise ValueError("k and l must be at least 2")
    wk = arc_weights(k, q_trunc)
    wl = arc_weights(l, q_trunc)
    cq = ramanujan_sums_upto(h, q_trunc)
    terms = cq[1:] * wk[1:] * wl[1:]
    value = math.fsum(terms.tolist())
    tail, rule = certified_tail(h, k, l, q_trunc, eps)
    return SingularSeriesValue(int(h), k, l, q_trunc, value, tail, rule)


def main_term(h: int, k: int, l: int, X: float, H1: float, q_trunc: int) -> float:
    """``c_{h,k,l} H1 (log X)^(k+l-2)`` with the series truncated at ``q_trunc``."""
    return singular_series(h, k, l, q_trunc).value * H1 * math.log(X) ** (k + l - 2)


def p_poly_leading(k: int, q0: int, q1: int, x: float) -> float:
    """Leading term ``a_{k,q0,q1} (log x)^(k-1)`` of the residue polynomial."""
    if x <= 1:
        raise ValueError("x must exceed 1")
    return a_coeff(k, q0, q1) * math.log(x) ** (k - 1)


def m_weight(k: int, q: int, x: float) -> float:
    """Leading-order ``M_{k,q}(x)``: lower powers of ``log x`` are not modelled."""
    if x <= 1:
        raise ValueError("x must exceed 1")
    return arc_weight(k, q) * math.log(x) ** (k - 1)
