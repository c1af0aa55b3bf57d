"""Exact-identity checks, each with a corruption hook that must make it fail."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .arith import divisor_k_window, sieve_window
from .characters import character_table, ramanujan_sums_upto
from .correlation import brute_force_oracle, correlate_window, correlation_sums
from .majorarc import (
    autocorr_identity,
    b_decomposition_check,
    full_circle_autocorr,
    phase_sum_v,
    v_envelope,
)
from .skfilter import desk_params, f_k_window
from .arith import phi_table

CORRUPTION = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    cases: int
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.cases} cases, max error {self.max_error:.3g} (tol {self.tolerance:g}){' ' + self.detail if self.detail else ''}"


def check_ramanujan(corrupt: bool = False, q_max: int = 200, h_max: int = 200) -> CheckResult:
    """Divisor formula against the unit exponential sum; ``c_q(0) = phi(q)`` exactly."""
    worst, cases = 0.0, 0
    table = {h: ramanujan_sums_upto(h, q_max) for h in range(0, h_max + 1)}
    hs = np.arange(-h_max, h_max + 1)
    for q in range(1, q_max + 1):
        units = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1])
        direct = np.exp(2j * np.pi * ((np.outer(units, hs)) % q) / q).sum(axis=0)
        formula = np.array([table[abs(h)][q] for h in hs.tolist()], dtype=float)
        if corrupt and q == q_max:
            formula[0] += CORRUPTION
        worst = max(worst, float(np.abs(direct - formula).max()))
        cases += hs.size
    exact_zero = bool(np.array_equal(table[0][1:], phi_table(q_max)[1:]))
    return CheckResult("ramanujan", worst <= 1e-9 and exact_zero, worst, 1e-9, cases,
                       "" if exact_zero else "c_q(0) != phi(q)")


def check_orthogonality(corrupt: bool = False, q_max: int = 100) -> CheckResult:
    """Row and column orthogonality of the character table."""
    worst, cases = 0.0, 0
    for q in range(1, q_max + 1):
        T = character_table(q)
        if corrupt and q == q_max:
            T = T.copy()
            T[-1, 1] *= np.exp(1j * CORRUPTION)
        phi = T.shape[0]
        rows = T @ T.conj().T
        worst = max(worst, float(np.abs(rows - phi * np.eye(phi)).max()))
        unit = np.abs(T[0]) > 0.5
        cols = T.conj().T @ T  # entry (r, n) = sum_chi conj(chi(r)) chi(n)
        expect = phi * np.diag(unit.astype(float))
        worst = max(worst, float(np.abs(cols - expect).max()))
        cases += 2
    return CheckResult("orthogonality", worst <= 1e-9, worst, 1e-9, cases)


def _g_vectors(x: int, m: int):
    table = sieve_window(x - 64, m + 128)
    return {
        "d2": divisor_k_window(table, 2),
        "d3": divisor_k_window(table, 3),
        "f2": f_k_window(table, 2, desk_params(x, 2)),
    }


def check_b_decomposition(corrupt: bool = False, q_max: int = 30, x: int = 10**6,
                          m: int = 1000) -> CheckResult:
    """Both sides of the split of ``B(m)`` by ``(n, q)`` and characters, all ``q <= q_max``."""
    worst, cases = 0.0, 0
    for gname, g in _g_vectors(x, m).items():
        for q in range(1, q_max + 1):
            for a in range(q):
                if math.gcd(a, q) != 1:
                    continue
                lhs, rhs = b_decomposition_check(g, x, m, a, q)
                if corrupt and q == q_max and gname == "f2":
                    rhs += CORRUPTION
                worst = max(worst, abs(lhs - rhs))
                cases += 1
    return CheckResult("b_decomposition", worst <= 1e-8, worst, 1e-8, cases)


def check_autocorrelation(corrupt: bool = False, sizes=(10, 100, 500),
                          grid: int = 10**4) -> CheckResult:
    """Full-circle Fejer quadrature against ``H - |h|``, plus the ``v_x`` envelope on a grid."""
    worst, cases = 0.0, 0
    for H in sizes:
        hs = np.arange(-H, H + 1)
        quad = full_circle_autocorr(H, hs)
        exact = np.array([autocorr_identity(H, int(h)) for h in hs])
        if corrupt and H == sizes[-1]:
            quad = quad + CORRUPTION * H
        # measured relative to H, the size of the identity's largest value
        worst = max(worst, float(np.abs(quad - exact).max()) / H)
        cases += hs.size
    env_ok = True
    for H in sizes:
        betas = np.linspace(-0.5, 0.5, grid)
        mags = np.array([abs(phase_sum_v(0.37, H, float(b)).value) for b in betas])
        env_ok &= bool(np.all(mags <= v_envelope(H, betas) * (1 + 1e-12)))
        cases += grid
    return CheckResult("autocorrelation", worst <= 1e-6 and env_ok, worst, 1e-6, cases,
                       "" if env_ok else "envelope violated")


def check_fft_vs_direct(corrupt: bool = False, draws: int = 20, seed: int = 7) -> CheckResult:
    """Transform path against the direct path: exact on integers, 1e-6 relative on floats."""
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    ok = True
    for i in range(draws):
        H1 = int(rng.integers(200, 2000))
        H2 = int(rng.integers(1, 60))
        u = rng.integers(0, 1000, size=H1 + 2 * H2)
        v = rng.integers(0, 1000, size=H1 + 2 * H2)
        a = correlate_window(u, v, H1, H2, "direct")
        b = correlate_window(u, v, H1, H2, "fft")
        if corrupt and i == draws - 1:
            b = b.copy()
            b[0] += 1
        ok &= bool(np.array_equal(a, b))
        worst = max(worst, float(np.abs(a - b).max()))
        uf, vf = u * 0.37, v * 1.1
        af = correlate_window(uf, vf, H1, H2, "direct")
        bf = correlate_window(uf, vf, H1, H2, "fft")
        ok &= bool(np.all(np.abs(af - bf) <= 1e-6 * np.abs(af).max()))
        cases += 2
    return CheckResult("fft_vs_direct", ok, worst, 0.0, cases)


def check_engine_oracle(corrupt: bool = False, draws: int = 50, seed: int = 11) -> CheckResult:
    """Sieve engine against trial division on random ``(X, H1, H2, k, l, x)``."""
    rng = np.random.default_rng(seed)
    ok, worst = True, 0.0
    for i in range(draws):
        X = int(rng.integers(100, 10**5 + 1))
        H1 = int(rng.integers(1, 1001))
        H2 = int(rng.integers(1, min(50, H1) + 1))
        k, l = (int(v) for v in rng.integers(2, 5, size=2))
        x = int(rng.integers(X, 2 * X + 1))
        engine = correlation_sums([x], H1, H2, k, l)[0][0]
        oracle = brute_force_oracle(X, H1, H2, k, l, x)
        if corrupt and i == draws - 1:
            oracle = oracle.copy()
            oracle[-1] += 1
        ok &= bool(np.array_equal(engine, oracle))
        worst = max(worst, float(np.abs(engine - oracle).max()))
    return CheckResult("engine_oracle", ok, worst, 0.0, draws)


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "ramanujan": check_ramanujan,
    "orthogonality": check_orthogonality,
    "b_decomposition": check_b_decomposition,
    "autocorrelation": check_autocorrelation,
    "fft_vs_direct": check_fft_vs_direct,
    "engine_oracle": check_engine_oracle,
}


def run_checks(names=None, corrupt=()) -> list[CheckResult]:
    names = list(CHECKS) if not names else list(names)
    unknown = [n for n in list(names) + list(corrupt) if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    return [CHECKS[n](corrupt=n in corrupt) for n in names]
