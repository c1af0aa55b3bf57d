import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from divcorr.arith import divisor_k_window, euler_phi, primes_up_to, sieve_window
from divcorr.characters import characters_mod
from divcorr.majorarc import (
    autocorr_identity,
    b_decomposition_check,
    decay_sweep,
    decomposition_rows,
    dissect,
    disjointness_threshold,
    exp_sum,
    farey,
    fejer,
    fejer_integral_exact,
    full_circle_autocorr,
    h_x,
    i_q_integral,
    nonprincipal_long_average,
    phase_sum_v,
    phase_sum_v_direct,
    prime_dirichlet_poly,
    rows_to_csv,
    upsilon,
    v_envelope,
    values_on_multiples,
)
from divcorr.skfilter import desk_params, f_k_window


def _d2(start, length):
    return divisor_k_window(sieve_window(start, length), 2)


def test_dissect_unit_modulus():
    d = dissect(1, 100)
    assert [(a.a, a.q) for a in d.arcs] == [(0, 1), (1, 1)]
    assert d.total_arc_length == pytest.approx(0.04)
    # 0/1 and 1/1 are the same point on the circle
    assert d.major_measure == pytest.approx(0.02)
    assert d.minor_measure == pytest.approx(0.98)


def test_dissect_small_denominators():
    d = dissect(3, 10**6)
    assert len(d.arcs) == sum(euler_phi(q) for q in range(1, 4)) + 1
    assert d.disjoint
    assert all(math.gcd(a.a, a.q) == 1 and 0 <= a.a <= a.q <= 3 for a in d.arcs)


def test_dissect_flags_overlap():
    assert dissect(5, 100).overlapping


def test_disjointness_needs_more_than_four_q_cubed():
    # arcs around 0/1 and 1/(Q-1)... the closest Farey neighbours at q = Q, Q-1 overlap at H1 = 4 Q^3
    assert dissect(3, 4 * 27).overlapping
    assert dissect(4, 4 * 64).overlapping
    for Q in range(1, 9):
        t = disjointness_threshold(Q)
        assert dissect(Q, t).disjoint
        assert dissect(Q, t - 1).overlapping


def test_farey_is_sorted_and_reduced():
    f = farey(7)
    vals = [Fraction(a, q) for a, q in f]
    assert vals == sorted(vals) and len(set(vals)) == len(vals)
    assert len(f) == 1 + sum(euler_phi(q) for q in range(1, 8))


def test_locate():
    d = dissect(3, 10**6)
    assert d.locate(1 / 3 + 1e-6).q == 3
    assert d.locate(0.1) is None


def test_dissect_csv():
    assert dissect(2, 1000).to_csv().splitlines()[0] == "q,a,center,halfwidth"


@given(st.floats(0, 1e6), st.integers(1, 10**4))
def test_h_x(x, H1):
    assert h_x(x, H1) == math.floor(H1 + x) - math.floor(x)


def test_phase_sum_at_zero():
    p = phase_sum_v(12.7, 100, 0.0)
    assert p.value == 100 and p.H_x == 100


@given(st.floats(0, 1e5), st.integers(1, 10**4), st.floats(-0.5, 0.5))
def test_phase_sum_closed_form(x, H1, beta):
    closed = phase_sum_v(x, H1, beta).value
    assert abs(closed - phase_sum_v_direct(x, H1, beta)) <= 1e-9 * max(1.0, h_x(x, H1))


@given(st.floats(0, 1e5), st.integers(1, 10**4), st.floats(-0.5, 0.5))
def test_phase_sum_envelope(x, H1, beta):
    mag = abs(phase_sum_v(x, H1, beta).value)
    H = h_x(x, H1)
    bound = H if beta == 0 else min(H, 1 / (2 * abs(beta)))
    assert mag <= bound * (1 + 1e-9)
    assert bound <= v_envelope(H1, beta) * (1 + 1e-12)


def test_phase_sum_domain():
    with pytest.raises(ValueError):
        phase_sum_v(0, 10, 0.6)


def test_exp_sum_examples():
    g = _d2(1000, 300)
    assert exp_sum(g, 1050, 100, 0.0) == pytest.approx(g.values[50:151].sum())
    spike = type(g)(1000, 2, np.where(np.arange(300) == 77, 5, 0))
    alpha = 0.1234
    assert exp_sum(spike, 1050, 100, alpha) == pytest.approx(5 * cmath.exp(2j * math.pi * alpha * 1077))
    for alpha in (0.1, 0.37, 1 / 3):
        assert abs(exp_sum(g, 1050, 100, alpha)) <= g.values[50:151].sum()
    with pytest.raises(ValueError):
        exp_sum(g, 1250, 100, 0.1)


def test_b_decomposition_examples():
    g = _d2(10**6 - 50, 400)
    lhs, rhs = b_decomposition_check(g, 10**6, 100, 0, 1)
    assert lhs == pytest.approx(g.values[51:151].sum()) and abs(lhs - rhs) < 1e-8
    lhs, rhs = b_decomposition_check(g, 10**6, 100, 1, 3)
    assert abs(lhs - rhs) < 1e-8
    t = sieve_window(10**6 - 50, 400)
    f2 = f_k_window(t, 2, desk_params(10**6, 2))
    lhs, rhs = b_decomposition_check(f2, 10**6, 300, 5, 12)
    assert abs(lhs - rhs) < 1e-8
    with pytest.raises(ValueError):
        b_decomposition_check(g, 10**6, 100, 1, 0)


def test_decomposition_rows_csv():
    g = _d2(10**4, 300)
    rows = decomposition_rows(g, 10**4, 200, 6)
    assert len(rows) == sum(euler_phi(q) for q in range(1, 7))
    assert max(r[-1] for r in rows) < 1e-8
    header = "q,a,lhs_re,lhs_im,rhs_re,rhs_im,delta"
    assert rows_to_csv(header.split(","), rows).splitlines()[0] == header


def test_values_on_multiples():
    got = values_on_multiples(6, 100, 120, 2)
    ref = _d2(6 * 101, 6 * 20).values[::6]
    assert np.array_equal(got, ref)


def test_upsilon_single_term():
    x, Y, H1 = 10**6, 5000, 300
    g = _d2(x + 1, Y)
    for beta in (0.0, 0.001, -0.01):
        u = upsilon(beta, x, Y, 1, 0, 2, H1=H1)
        v = phase_sum_v(x, H1, beta).value
        assert u == pytest.approx(v * g.values.sum() / Y, rel=1e-10, abs=1e-8)
    assert upsilon(0.0, x, Y, 1, 0, 2, H1=H1) == pytest.approx(H1 * g.values.mean())


def test_upsilon_restricted_matches_manual():
    x, Y = 10**6, 3000
    p = desk_params(x, 2)
    manual = 0.0
    for q1 in (1, 3):
        q0 = 3 // q1
        mu = -1 if q1 == 3 else 1
        lo = x // q0
        t = sieve_window(q0 * (lo + 1), q0 * Y)
        vals = f_k_window(t, 2, p).values[::q0]
        n = np.arange(lo + 1, lo + Y + 1)
        manual += mu * vals[np.gcd(n, q1) == 1].sum() / (q0 * euler_phi(q1))
    u = upsilon(1 / 3, x, Y, 3, 1, 2, g=p, H1=50)
    assert u == pytest.approx(50 * manual / Y, rel=1e-10)


def test_fejer_exact_integral_recovers_pair_count():
    for H in (1, 7, 40):
        for h in range(-H, H + 1):
            assert fejer_integral_exact(H, h, 0.5) == pytest.approx(H - abs(h), abs=1e-9)


def test_autocorr_identity_examples():
    assert autocorr_identity(10, 0) == 10
    assert autocorr_identity(10, 3) == 7
    assert autocorr_identity(10, 10) == 0
    with pytest.raises(ValueError):
        autocorr_identity(10, 11)


def test_full_circle_quadrature():
    for H in (10, 100):
        hs = np.arange(-H, H + 1)
        quad = full_circle_autocorr(H, hs)
        assert np.abs(quad - (H - np.abs(hs))).max() <= 1e-6 * H


def test_i_q_positive_and_against_exact_and_riemann():
    val = i_q_integral(2, 0.3, 200, 0, 3)
    assert val > 0
    B = 9 / (2 * 200)
    assert val == pytest.approx(fejer_integral_exact(200, 0, B), rel=1e-6)
    # midpoint rule on a grid far finer than 1/H
    n = 400_000
    beta = -B + (np.arange(n) + 0.5) * (2 * B / n)
    riemann = float((fejer(beta, 200) * np.cos(2 * np.pi * beta * 5)).sum() * (2 * B / n))
    assert i_q_integral(2, 0.3, 200, 5, 3) == pytest.approx(riemann, rel=1e-6)


def test_i_q_full_range_is_identity():
    assert i_q_integral(1, 0.0, 50, 7, 100) == pytest.approx(43, rel=1e-6)


def test_prime_polynomial_trivial_character():
    ps = [p for p in primes_up_to(1000) if p >= 100]
    val = prime_dirichlet_poly(100, 1000, None, 0.0)
    assert val.imag == 0 and val.real == pytest.approx(math.fsum(1 / p for p in ps), rel=1e-14)
    (chi0,) = characters_mod(1)
    assert prime_dirichlet_poly(100, 1000, chi0, 0.0) == pytest.approx(val)


@given(st.floats(-1e4, 1e4), st.integers(0, 5))
def test_prime_polynomial_bound(t, idx):
    chi = characters_mod(7)[idx]
    mertens = math.fsum(1 / p for p in primes_up_to(2000) if p >= 50)
    assert abs(prime_dirichlet_poly(50, 2000, chi, t)) <= mertens * (1 + 1e-12)


def test_prime_polynomial_validation():
    with pytest.raises(ValueError):
        prime_dirichlet_poly(1, 10, None, 0)
    with pytest.raises(ValueError):
        prime_dirichlet_poly(2, 10, None, 2e6)


def test_decay_sweep_shape():
    ts = np.linspace(0, 100, 6).tolist()
    s = decay_sweep(1e3, 1e5, 7, ts)
    assert len(s.rows) == 5 * len(ts)
    assert s.to_csv().splitlines()[0] == "t,chi_index,magnitude"
    assert math.isfinite(s.fitted_c)


def test_nonprincipal_long_average():
    assert nonprincipal_long_average(1, 1, 10**5, 100, 3.0, 2) == []
    X, Y, T = 10**5, 60, 2.5
    out = nonprincipal_long_average(3, 2, X, Y, T, 2)
    (chi,) = [c for c in characters_mod(3) if not c.principal]
    lo = X // 2
    d = _d2(2 * (lo + 1), 2 * Y).values[::2]
    direct = sum(int(d[i]) * chi(lo + 1 + i) * cmath.exp(1j * T * math.log(lo + 1 + i)) for i in range(Y))
    assert out[0]["magnitude"] == pytest.approx(abs(direct), rel=1e-12)
    assert out[0]["magnitude"] <= d.sum()
    assert out[0]["normalized"] == pytest.approx(out[0]["magnitude"] * math.log(X) / Y)
