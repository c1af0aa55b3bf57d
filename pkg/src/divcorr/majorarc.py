"""Circle-method objects on the major arcs, and prime Dirichlet polynomials.

``e(t) = exp(2 pi i t)`` throughout.  Phases of the form ``alpha * n`` with
large ``n`` are reduced modulo 1 exactly (a float is a dyadic rational) before
they reach ``exp``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import quad_vec

from .arith import (
    FactorTable,
    SieveInfeasible,
    _prime_array,
    MAX_BASE_PRIME,
    divisor_k_window,
    divisors,
    euler_phi,
    mobius,
    sieve_window,
)
from .characters import DirichletCharacter, character_table, characters_mod
from .skfilter import SkParams, membership_window

TWO_PI = 2.0 * math.pi
T_CAP = 10**6

# g(q0 n) providers: None means d_k, SkParams means f_k, or any callable on a FactorTable
GLike = Union[None, SkParams, Callable[[FactorTable], np.ndarray]]


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def _frac_part(alpha, n: int) -> float:
    """``alpha * n mod 1`` computed exactly for float or Fraction ``alpha``."""
    r = (Fraction(alpha) * n) % 1
    return float(r)


def _phases(alpha, start: int, count: int) -> np.ndarray:
    """``alpha * n mod 1`` for ``n = start .. start + count - 1``."""
    base = _frac_part(alpha, start)
    if isinstance(alpha, Fraction):
        num, den = alpha.numerator, alpha.denominator
        steps = (np.arange(count, dtype=np.int64) * (num % den)) % den
        return (base + steps / den) % 1.0
    return (base + np.arange(count) * float(alpha)) % 1.0


def _e(t) -> np.ndarray:
    return np.exp(1j * TWO_PI * np.asarray(t, dtype=float))


def _csum(z: np.ndarray) -> complex:
    z = np.asarray(z, dtype=complex)
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


# arcs --------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    q: int
    a: int
    center: float
    halfwidth: float


@dataclass(frozen=True)
class ArcDissection:
    """Arcs ``|alpha - a/q| <= Q^2 / H1`` around every reduced ``a/q`` in ``[0, 1]``, ``q <= Q``.

    ``total_arc_length`` adds up the listed arcs (0/1 and 1/1 both counted);
    ``major_measure`` is the measure of their union on the circle.
    """

    Q: int
    H1: int
    halfwidth: float
    arcs: tuple[Arc, ...]
    total_arc_length: float
    major_measure: float
    minor_measure: float
    overlapping: bool

    @property
    def disjoint(self) -> bool:
        return not self.overlapping

    def locate(self, alpha: float) -> Arc | None:
        """An arc containing ``alpha`` (taken mod 1), or ``None`` on the minor arcs."""
        t = alpha % 1.0
        centers = np.array([arc.center for arc in self.arcs])
        i = int(np.argmin(np.abs(centers - t)))
        return self.arcs[i] if abs(centers[i] - t) <= self.halfwidth else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "a", "center", "halfwidth"])
        for arc in self.arcs:
            w.writerow([arc.q, arc.a, repr(arc.center), repr(arc.halfwidth)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "Q": self.Q, "H1": self.H1, "halfwidth": self.halfwidth,
            "arcs": [[a.q, a.a, a.center, a.halfwidth] for a in self.arcs],
            "total_arc_length": self.total_arc_length,
            "major_measure": self.major_measure,
            "minor_measure": self.minor_measure,
            "overlapping": self.overlapping,
        }


def farey(Q: int) -> list[tuple[int, int]]:
    """Reduced fractions ``a/q`` in ``[0, 1]`` with ``q <= Q``, increasing, as ``(a, q)``."""
    a, b, c, d = 0, 1, 1, Q
    out = [(0, 1)]
    while c <= Q:
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        out.append((a, b))
    return out


def dissect(Q: int, H1: int) -> ArcDissection:
    if Q < 1 or H1 < 1:
        raise ValueError("Q and H1 must be positive")
    fr = farey(Q)
    # closed arcs of halfwidth Q^2/H1 meet iff the gap (a'q - aq')/(qq') is <= 2 Q^2 / H1
    overlapping = any(H1 * (a2 * q1 - a1 * q2) <= 2 * Q * Q * q1 * q2
                      for (a1, q1), (a2, q2) in zip(fr, fr[1:]))
    w = Q * Q / H1
    arcs = tuple(Arc(q, a, a / q, w) for a, q in fr)
    # union on the circle: wrap everything into [0, 1) and merge
    ivs = sorted(((a / q - w) % 1.0, (a / q - w) % 1.0 + 2 * w) for a, q in fr[:-1])
    if 2 * w >= 1.0:
        union = 1.0
    else:
        union, cur_lo, cur_hi = 0.0, None, None
        pieces = []
        for lo, hi in ivs:
            if hi > 1.0:
                pieces += [(lo, 1.0), (0.0, hi - 1.0)]
            else:
                pieces.append((lo, hi))
        for lo, hi in sorted(pieces):
            if cur_hi is None or lo > cur_hi:
                if cur_hi is not None:
                    union += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        union += cur_hi - cur_lo
        union = min(union, 1.0)
    return ArcDissection(Q, H1, w, arcs, 2 * w * len(arcs), union, max(0.0, 1.0 - union), overlapping)


def disjointness_threshold(Q: int) -> int:
    """Smallest ``H1`` for which ``dissect(Q, H1)`` is guaranteed disjoint.

    Adjacent Farey fractions of order ``Q >= 2`` are at least ``1/(Q(Q-1))``
    apart, so ``H1 > 2 Q^3 (Q-1)`` suffices.  For ``Q = 1`` the only gap is
    ``0/1 .. 1/1``, of length one.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    if Q == 1:
        return 3
    return 2 * Q**3 * (Q - 1) + 1


# v_x and S_g -------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSum:
    x: float
    H1: int
    H_x: int
    beta: float
    value: complex


def h_x(x: float, H1: int) -> int:
    return math.floor(H1 + x) - math.floor(x)


def _dirichlet_kernel(H: int, beta: np.ndarray) -> np.ndarray:
    """``sum_{m=1}^{H} e(beta m) = e(beta (H+1)/2) sin(pi H beta) / sin(pi beta)``."""
    beta = np.asarray(beta, dtype=float)
    s = np.sin(np.pi * beta)
    small = np.abs(s) < 1e-300
    ratio = np.where(small, float(H), np.sin(np.pi * H * beta) / np.where(small, 1.0, s))
    return _e(beta * (H + 1) / 2.0) * ratio


def phase_sum_v(x: float, H1: int, beta: float) -> PhaseSum:
    """``v_x(beta) = e(beta floor(x)) sum_{1 <= m <= H_x} e(beta m)`` in closed form."""
    if abs(beta) > 0.5:
        raise ValueError("beta must satisfy |beta| <= 1/2")
    H = h_x(x, H1)
    if beta == 0:
        return PhaseSum(x, H1, H, beta, complex(H))
    lead = _e(_frac_part(beta, math.floor(x)))
    return PhaseSum(x, H1, H, beta, complex(lead * _dirichlet_kernel(H, beta)))


def phase_sum_v_direct(x: float, H1: int, beta: float) -> complex:
    H = h_x(x, H1)
    fx = math.floor(x)
    return _csum(_e(_phases(beta, fx + 1, H)))


def v_envelope(H1: int, beta) -> np.ndarray:
    """``2 H1 / (1 + H1 |beta|)``."""
    return 2.0 * H1 / (1.0 + H1 * np.abs(np.asarray(beta, dtype=float)))


def _values(g, n_lo: int, n_hi: int) -> np.ndarray:
    """Values of a DivisorVector-like ``g`` on ``n_lo..n_hi`` inclusive, checking coverage."""
    start = g.window_start
    if n_lo < start or n_hi >= start + len(g.values):
        raise ValueError(f"g does not cover [{n_lo}, {n_hi}]")
    return np.asarray(g.values[n_lo - start : n_hi - start + 1])


def exp_sum(g, x: int, H1: int, alpha) -> complex:
    """``S_g(alpha, x) = sum_{x <= n <= x + H1} g(n) e(alpha n)``."""
    vals = _values(g, x, x + H1)
    return _csum(vals * _e(_phases(alpha, x, H1 + 1)))


# exact character decomposition --------------------------------------------

def b_decomposition_check(g, x: int, m: int, a: int, q: int) -> tuple[complex, complex]:
    """Both sides of the split of ``B(m) = sum_{x < n <= x+m} g(n) e(an/q)`` by ``q0 = (n, q)``.

    The right side is assembled from character tables only: for each
    ``q0 | q``, residues ``r`` mod ``q1 = q/q0`` and characters mod ``q1``.
    """
    if q < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(a, q) != 1:
        raise ValueError("need gcd(a, q) = 1")
    lhs = _csum(_values(g, x + 1, x + m) * _e(_phases(Fraction(a, q), x + 1, m)))
    parts = []
    for q0 in divisors(q):
        q1 = q // q0
        lo, hi = x // q0 + 1, (x + m) // q0
        if hi < lo:
            continue
        n = np.arange(lo, hi + 1, dtype=np.int64)
        gv = _values(g, q0 * lo, q0 * hi)[::q0]
        table = character_table(q1)  # phi(q1) x q1
        inner = table[:, n % q1] @ gv  # sum_n g(q0 n) chi(n), one entry per chi
        units = np.array([r for r in range(q1) if math.gcd(r, q1) == 1], dtype=np.int64)
        er = _e(_phases(Fraction(a, q1), 0, q1))[units]
        # sum_r e(ar/q1) sum_chi conj(chi(r)) inner_chi
        per_r = np.conj(table[:, units]).T @ inner
        parts.append(_csum(er * per_r) / euler_phi(q1))
    rhs = complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))
    return lhs, rhs


# long averages on multiples ------------------------------------------------

def _g_on_table(table: FactorTable, k: int, g: GLike) -> np.ndarray:
    if g is None:
        return divisor_k_window(table, k).values
    if isinstance(g, SkParams):
        dk = divisor_k_window(table, k).values
        return np.where(membership_window(table, g.for_k(k)), dk, 0)
    return np.asarray(g(table))


def values_on_multiples(q0: int, lo: int, hi: int, k: int, g: GLike = None) -> np.ndarray:
    """``g(q0 n)`` for integers ``lo < n <= hi``."""
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    table = sieve_window(q0 * (lo + 1), q0 * (hi - lo))
    return _g_on_table(table, k, g)[::q0]


def default_Y(X: float) -> int:
    return int(min(X / math.log(X) ** 3, 10**7))


def upsilon(alpha: float, x: int, Y: int, q: int, a: int, k: int, g: GLike = None,
            H1: int = 1) -> complex:
    """``v_x(alpha - a/q) / Y * sum_{q0 q1 = q} mu(q1) / (q0 phi(q1)) sum_n chi_0(n) g(q0 n)``.

    ``n`` runs over ``x/q0 < n <= x/q0 + Y`` and ``chi_0`` is principal mod ``q1``.
    """
    if Y < 1:
        raise ValueError("Y must be positive")
    if q * (Y + 1) > 4 * 10**8:
        raise SieveInfeasible(f"long average of length {q * Y} on multiples is too large")
    beta = alpha - a / q
    beta = (beta + 0.5) % 1.0 - 0.5
    v = phase_sum_v(x, H1, beta).value
    total = 0.0
    for q1 in divisors(q):
        mu = mobius(q1)
        if not mu:
            continue
        q0 = q // q1
        lo = x // q0
        gv = values_on_multiples(q0, lo, lo + Y, k, g)
        n = np.arange(lo + 1, lo + Y + 1)
        coprime = np.gcd(n, q1) == 1
        total += mu * math.fsum(gv[coprime].astype(float).tolist()) / (q0 * euler_phi(q1))
    return v * total / Y


# I_q and the Fejer identity ----------------------------------------------

def fejer(beta, H: int) -> np.ndarray:
    """``|v_x(beta)|^2 = (sin(pi H beta) / sin(pi beta))^2``."""
    return np.abs(_dirichlet_kernel(H, beta)) ** 2


def fejer_integral_exact(H: int, h: int, B: float) -> float:
    """``int_{-B}^{B} |v|^2 e(beta h) d beta`` from ``|v|^2 = sum_{|d| < H} (H - |d|) e(beta d)``."""
    d = np.arange(-(H - 1), H)
    w = (H - np.abs(d)).astype(float)
    m = d + h
    safe = np.where(m == 0, 1, m)
    terms = np.where(m == 0, 2.0 * B, np.sin(TWO_PI * B * m) / (np.pi * safe))
    return math.fsum((w * terms).tolist())


def _fejer_quad(H: int, hs: np.ndarray, B: float, rtol: float) -> np.ndarray:
    """``int_{-B}^{B} |v|^2 cos(2 pi beta h) d beta`` for every ``h`` in ``hs`` at once."""
    hs = np.asarray(hs, dtype=float)
    B = min(B, 0.5)
    if B <= 0:
        return np.zeros(hs.size)

    def f(beta):
        return fejer(beta, H) * np.cos(TWO_PI * beta * hs)

    # breakpoints on the kernel's oscillation scale 1/H; the integrand is even
    step = 1.0 / (2 * H)
    points = np.arange(step, B, step)[:4000].tolist()
    val, err = quad_vec(f, 0.0, B, epsabs=rtol * H * 1e-3, epsrel=rtol * 1e-2,
                        norm="max", points=points or None, limit=20000)
    if not np.all(np.isfinite(val)) or err > rtol * max(H, 1.0):
        raise QuadratureError(f"quadrature error estimate {err:.3g} above tolerance")
    return 2.0 * np.atleast_1d(val)


def i_q_integral(q: int, x: float, H1: int, h: int, Q: int, rtol: float = 1e-6) -> float:
    """``I_q = int_{|beta| <= Q^2/(q H1)} |v_x(beta)|^2 e(beta h) d beta`` by adaptive quadrature.

    The range is clipped to the circle ``|beta| <= 1/2``; the imaginary part
    vanishes by symmetry.
    """
    if q < 1 or H1 < 1 or Q < 1:
        raise ValueError("q, H1 and Q must be positive")
    H = h_x(x, H1)
    return float(_fejer_quad(H, np.array([h]), Q * Q / (q * H1), rtol)[0])


def autocorr_identity(H_x: int, h: int) -> int:
    """``#{1 <= m1, m2 <= H_x : m1 - m2 = h}``."""
    if abs(h) > H_x:
        raise ValueError("need |h| <= H_x")
    return H_x - abs(h)


def full_circle_autocorr(H_x: int, hs: Sequence[int], rtol: float = 1e-6) -> np.ndarray:
    """Quadrature of ``|v|^2 e(beta h)`` over the whole circle, for each ``h``."""
    return _fejer_quad(H_x, np.asarray(hs), 0.5, rtol)


# prime Dirichlet polynomials ---------------------------------------------

def _primes_between(P: float, Q: float) -> np.ndarray:
    if Q > MAX_BASE_PRIME:
        raise SieveInfeasible(f"primes up to {Q:.3g} requested")
    ps = _prime_array(int(Q))
    return ps[ps >= P]


def _chi_at(chi: DirichletCharacter | None, n: np.ndarray) -> np.ndarray:
    if chi is None:
        return np.ones(n.size, dtype=complex)
    return chi(n)


def prime_dirichlet_poly(P: float, Q: float, chi: DirichletCharacter | None, t: float) -> complex:
    """``sum_{P <= p <= Q} chi(p) / p^(1 + it)``; ``chi=None`` is the trivial character."""
    if not 2 <= P <= Q:
        raise ValueError("need 2 <= P <= Q")
    if abs(t) > T_CAP:
        raise ValueError(f"|t| above {T_CAP} loses phase accuracy")
    ps = _primes_between(P, Q)
    logp = np.log(ps.astype(float))
    terms = _chi_at(chi, ps) * np.exp(-1j * t * logp) / ps
    return _csum(terms)


@dataclass(frozen=True)
class DecaySweep:
    P: float
    Q: float
    X: float
    q: int
    theta: float
    rows: tuple[tuple[float, int, float], ...]
    fitted_c: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "chi_index", "magnitude"])
        for t, i, mag in self.rows:
            w.writerow([repr(t), i, repr(mag)])
        return buf.getvalue()


def decay_sweep(P: float, Q: float, q: int, ts: Sequence[float], X: float | None = None) -> DecaySweep:
    """``|sum_p chi(p) p^(-1-it)|`` for every non-principal ``chi`` mod ``q`` and every ``t``.

    ``fitted_c`` is the largest ``c`` with every magnitude below
    ``exp(-c (log X)^(theta - 2/3) / (log log X)^(1/3))``, where
    ``P = exp((log X)^theta)``.  It is a descriptive number, nothing is asserted.
    """
    X = float(Q if X is None else X)
    LX = math.log(X)
    theta = math.log(math.log(P)) / math.log(LX)
    ps = _primes_between(P, Q)
    logp = np.log(ps.astype(float))
    rows = []
    for chi in characters_mod(q):
        if chi.principal:
            continue
        base = chi(ps) / ps
        for t in ts:
            if abs(t) > T_CAP:
                raise ValueError(f"|t| above {T_CAP} loses phase accuracy")
            mag = abs(_csum(base * np.exp(-1j * t * logp)))
            rows.append((float(t), chi.index, mag))
    if rows:
        worst = max(r[2] for r in rows)
        scale = LX ** (theta - 2.0 / 3.0) / math.log(LX) ** (1.0 / 3.0)
        fitted = -math.log(worst) / scale if worst > 0 else math.inf
    else:
        fitted = math.nan
    return DecaySweep(P, Q, X, q, theta, tuple(rows), fitted)


def nonprincipal_long_average(q: int, q0: int, X: int, Y: int, T: float, k: int,
                              g: GLike = None, K: float = 1.0) -> list[dict]:
    """``|sum_{X/q0 < n <= X/q0 + Y} g(q0 n) chi(n) n^(iT)|`` for each non-principal ``chi`` mod ``q``.

    ``normalized`` divides by ``Y / (log X)^K``.
    """
    if abs(T) > T_CAP:
        raise ValueError(f"|T| above {T_CAP} loses phase accuracy")
    if Y < 1:
        raise ValueError("Y must be positive")
    lo = X // q0
    gv = values_on_multiples(q0, lo, lo + Y, k, g).astype(float)
    n = np.arange(lo + 1, lo + Y + 1, dtype=np.int64)
    twist = gv * np.exp(1j * T * np.log(n.astype(float)))
    norm = Y / math.log(X) ** K
    out = []
    for chi in characters_mod(q):
        if chi.principal:
            continue
        mag = abs(_csum(twist * chi(n)))
        out.append({"chi_index": chi.index, "magnitude": mag, "normalized": mag / norm})
    return out


def decomposition_rows(g, x: int, m: int, qmax: int) -> list[tuple]:
    """``(q, a, lhs_re, lhs_im, rhs_re, rhs_im, delta)`` for all ``q <= qmax`` and reduced ``a``."""
    rows = []
    for q in range(1, qmax + 1):
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            lhs, rhs = b_decomposition_check(g, x, m, a, q)
            rows.append((q, a, lhs.real, lhs.imag, rhs.real, rhs.imag, abs(lhs - rhs)))
    return rows


def rows_to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()
