"""The typical set ``S_k`` and the restricted divisor function ``f_k = d_k 1_{S_k}``.

Membership of ``n`` asks for

(a) at least one prime factor in every window ``[P, Q]``,
(b) ``Omega(n) <= omega_cap``,
(c) at most ``big_prime_cap`` prime factors ``>= big_prime_threshold``
    (counted up to ``2X``).

Canonical windows follow the asymptotic thresholds and are empty at every
feasible ``X``; ``scaled`` mode keeps the same structure with user exponents.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np

from .arith import (
    FactorTable,
    DivisorVector,
    big_omega,
    big_omega_window,
    count_in_range_window,
    count_prime_factors_in_range,
    divisor_k_window,
    sieve_window,
)

CANONICAL = "canonical"
SCALED = "scaled"

# powers of log X used by desk_params: four disjoint windows, all above 2 for
# X >= 10^5; S_k then keeps roughly 2% of integers near 10^8
DESK_EXPONENTS = ((0.3, 0.7), (0.75, 1.2), (1.25, 1.8), (1.85, 2.6))


def _exp_or_inf(log_value: float) -> float:
    return math.exp(log_value) if log_value < 709.0 else math.inf


def _windows_overlap(windows: Sequence[tuple[float, float]]) -> bool:
    w = sorted(windows)
    return any(w[i + 1][0] <= w[i][1] for i in range(len(w) - 1))


@dataclass(frozen=True)
class SkParams:
    """Thresholds defining ``S_k`` at scale ``X``."""

    X: int
    k: int
    psi: float
    phi: float
    eps_prime: float
    windows: tuple[tuple[float, float], ...]
    omega_cap: float
    big_prime_cap: float
    big_prime_threshold: float
    mode: str = SCALED
    with_multiplicity: bool = True

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple((float(P), float(Q)) for P, Q in self.windows))
        if self.mode not in (CANONICAL, SCALED):
            raise ValueError(f"unknown mode {self.mode!r}")
        for P, Q in self.windows:
            if not 2.0 <= P <= Q:
                raise ValueError(f"window [{P}, {Q}] violates 2 <= P <= Q")
        if self.mode == SCALED and _windows_overlap(self.windows):
            raise ValueError("scaled windows must be pairwise disjoint")

    @property
    def windows_disjoint(self) -> bool:
        return not _windows_overlap(self.windows)

    def for_k(self, k: int) -> "SkParams":
        """Same windows, caps recomputed for another ``k``."""
        if k == self.k:
            return self
        lll = math.log(math.log(math.log(self.X)))
        return replace(
            self,
            k=k,
            omega_cap=(1 + self.eps_prime) * k * math.log(math.log(self.X)),
            big_prime_cap=10 * k * lll,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["windows"] = [list(w) for w in self.windows]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SkParams":
        d = dict(d)
        d["windows"] = tuple(tuple(w) for w in d["windows"])
        return cls(**d)

    def to_json(self) -> str:
        # canonical windows can be infinite; Python's json writes them as Infinity
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SkParams":
        return cls.from_dict(json.loads(text))


def _caps(X: float, k: int, eps_prime: float) -> tuple[float, float, float]:
    ll = math.log(math.log(X))
    lll = math.log(ll)
    return (1 + eps_prime) * k * ll, 10 * k * lll, X ** (1.0 / ll**2)


def canonical_params(X: int, k: int, psi: float, phi: float, eps_prime: float) -> SkParams:
    """Thresholds of the asymptotic construction, evaluated at ``X``.

    Windows, in order::

        [(log X)^psi,               (log X)^(80 k log k)]
        [(log X)^(10000 k log k),   (log X)^(0.1 phi)]
        [exp((log log X)^2),        exp((log log X)^(5/2))]
        [exp((log X)^(3/4)),        exp((log X)^(5/6))]

    The third window is ``[P_2, Q_2]`` and the fourth ``[P_3, Q_3]``.  Values that overflow a double are stored as ``inf``.  At desk-scale ``X``
    the third and fourth windows overlap; this is allowed in canonical mode
    and reported by ``windows_disjoint``.
    """
    if X < 16:
        raise ValueError("X must be at least 16 so that log log X > 1")
    if k < 2:
        raise ValueError("k must be at least 2")
    if psi <= 0 or phi <= 0:
        raise ValueError("psi and phi must be positive")
    if not 0 <= eps_prime < 1:
        raise ValueError("eps_prime must lie in [0, 1)")
    L = math.log(X)
    ll = math.log(L)
    logs = [
        (psi * ll, 80 * k * math.log(k) * ll),
        (10000 * k * math.log(k) * ll, 0.1 * phi * ll),
        (ll**2, ll**2.5),
        (L**0.75, L ** (5.0 / 6.0)),
    ]
    for i, (lp, lq) in enumerate(logs):
        if lp > lq:
            raise ValueError(f"canonical window {i + 1} is empty: log P = {lp:.4g} > log Q = {lq:.4g}")
    windows = tuple((_exp_or_inf(lp), _exp_or_inf(lq)) for lp, lq in logs)
    omega_cap, big_cap, threshold = _caps(X, k, eps_prime)
    params = SkParams(X, k, psi, phi, eps_prime, windows, omega_cap, big_cap, threshold, CANONICAL)
    if not params.windows_disjoint:
        warnings.warn("canonical windows overlap at this X", RuntimeWarning, stacklevel=2)
    return params


def scaled_params(X: int, k: int, exponents: Sequence[tuple[float, float]] | None = None,
                  windows: Sequence[tuple[float, float]] | None = None,
                  eps_prime: float = 0.5, psi: float | None = None, phi: float | None = None,
                  omega_cap: float | None = None, big_prime_cap: float | None = None) -> SkParams:
    """Desk-scale thresholds: windows given directly or as powers of ``log X``."""
    if (exponents is None) == (windows is None):
        raise ValueError("give exactly one of exponents or windows")
    if X < 16:
        raise ValueError("X must be at least 16")
    L = math.log(X)
    if exponents is not None:
        windows = [(L**a, L**b) for a, b in exponents]
        psi = exponents[0][0] if psi is None else psi
        phi = 10.0 * exponents[1][1] if phi is None else phi
    ocap, bcap, threshold = _caps(X, k, eps_prime)
    return SkParams(
        X, k,
        psi=float(psi if psi is not None else 0.0),
        phi=float(phi if phi is not None else 0.0),
        eps_prime=eps_prime,
        windows=tuple(windows),
        omega_cap=ocap if omega_cap is None else omega_cap,
        big_prime_cap=bcap if big_prime_cap is None else big_prime_cap,
        big_prime_threshold=threshold,
        mode=SCALED,
    )


def desk_params(X: int, k: int, eps_prime: float = 0.5) -> SkParams:
    return scaled_params(X, k, exponents=DESK_EXPONENTS, eps_prime=eps_prime)


def is_member(factorization, params: SkParams) -> bool:
    """Whether the integer with this factorization lies in ``S_k``."""
    m = params.with_multiplicity
    for P, Q in params.windows:
        if count_prime_factors_in_range(factorization, P, Q, m) == 0:
            return False
    if big_omega(factorization) > params.omega_cap:
        return False
    if params.big_prime_threshold > 2.0 * params.X:
        return True
    big = count_prime_factors_in_range(factorization, params.big_prime_threshold, 2.0 * params.X, m)
    return big <= params.big_prime_cap


def membership_window(table: FactorTable, params: SkParams) -> np.ndarray:
    """Vectorised ``is_member`` over a factored window."""
    m = params.with_multiplicity
    keep = np.ones(table.window_length, dtype=bool)
    for P, Q in params.windows:
        keep &= count_in_range_window(table, P, Q, m) > 0
    keep &= big_omega_window(table) <= params.omega_cap
    if params.big_prime_threshold <= 2.0 * params.X:
        big = count_in_range_window(table, params.big_prime_threshold, 2.0 * params.X, m)
        keep &= big <= params.big_prime_cap
    return keep


def f_k_window(table: FactorTable, k: int, params: SkParams) -> DivisorVector:
    """``f_k(n) = d_k(n)`` on ``S_k`` and 0 elsewhere."""
    dk = divisor_k_window(table, k)
    return DivisorVector(table.window_start, k, np.where(membership_window(table, params), dk.values, 0))


@dataclass(frozen=True)
class DiscrepancyStats:
    statistic: float
    excluded_fraction: float
    num_samples: int
    per_sample: tuple[float, ...]


def _draw_x(X: int, samples, seed: int) -> list[int]:
    if isinstance(samples, (int, np.integer)):
        if samples < 1:
            raise ValueError("need at least one sample")
        rng = np.random.default_rng(seed)
        return sorted(rng.integers(X + 1, 2 * X + 1, size=int(samples)).tolist())
    xs = sorted(int(x) for x in samples)
    if not xs:
        raise ValueError("empty sample set")
    return xs


def discrepancy_stats(X: int, H1: int, H2: int, k: int, l: int, params: SkParams,
                      samples, seed: int = 0) -> DiscrepancyStats:
    """Sampled estimate of the normalised ``|d_k - f_k|(n) d_l(n+h)`` mass.

    ``samples`` is either a count (uniform draws from ``(X, 2X]`` with ``seed``)
    or an explicit collection of ``x``.  For each ``x`` the sum over
    ``0 < |h| <= H2`` and ``x < n <= x + H1`` is divided by
    ``H1 H2 (log X)^(k+l-2)``; the statistic is the mean over ``x``.
    """
    if not 1 <= H2 <= H1 <= X:
        raise ValueError("need 1 <= H2 <= H1 <= X")
    xs = _draw_x(X, samples, seed)
    norm = H1 * H2 * math.log(X) ** (k + l - 2)
    per, excluded = [], 0
    for x in xs:
        table = sieve_window(x - H2 + 1, H1 + 2 * H2)
        dk = divisor_k_window(table, k).values
        member = membership_window(table, params)
        dl = divisor_k_window(table, l).values
        gap = np.where(member, 0, dk)[H2 : H2 + H1]
        total = 0
        for h in range(1, H2 + 1):
            total += int(gap @ dl[H2 + h : H2 + h + H1]) + int(gap @ dl[H2 - h : H2 - h + H1])
        per.append(total / norm)
        excluded += int((~member[H2 : H2 + H1]).sum())
    return DiscrepancyStats(math.fsum(per) / len(per), excluded / (len(xs) * H1), len(xs), tuple(per))
