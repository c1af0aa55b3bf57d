import math

import pytest
from hypothesis import given, strategies as st

from divcorr.arith import divisor_k, divisors, euler_phi, factorize, mobius, sieve_window, divisor_k_window
from divcorr.singular import (
    SingularSeriesValue,
    a_coeff,
    arc_weight,
    arc_weight_bound,
    arc_weights,
    main_term,
    m_weight,
    p_poly_leading,
    singular_series,
)


def _dk(n, k):
    return divisor_k(factorize(n) if n > 1 else [], k)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_a_coeff_trivial_moduli(k):
    assert a_coeff(k, 1, 1) == pytest.approx(1 / math.factorial(k - 1), rel=1e-15)


def test_a_coeff_two_one_series_oracle():
    series = math.fsum((j + 2) / 2**j for j in range(200))
    assert a_coeff(2, 2, 1) == pytest.approx(0.25 * series, rel=1e-13)
    assert a_coeff(2, 2, 1) == pytest.approx(1.5, rel=1e-15)


@given(st.integers(2, 5), st.integers(1, 10**4), st.integers(1, 10**4))
def test_a_coeff_bounded_by_dk(k, q0, q1):
    assert a_coeff(k, q0, q1) <= _dk(q0, k) * (1 + 1e-12)


def test_a_coeff_forms_agree_on_coprime_moduli():
    for q0 in range(1, 40):
        for q1 in range(1, 40):
            if math.gcd(q0, q1) == 1:
                assert a_coeff(3, q0, q1) == a_coeff(3, q0, q1, form="shortcut")


@pytest.mark.parametrize("k", [2, 3, 4])
def test_arc_weight_at_one(k):
    assert arc_weight(k, 1) == pytest.approx(1 / math.factorial(k - 1))


def test_arc_weight_binary_is_reciprocal():
    # sum_{n <= N, q | n} d_2(n) / sum_{n <= N} d_2(n) -> w_2(q) in the main term, and w_2(q) = 1/q
    for q in range(1, 300):
        assert arc_weight(2, q) == pytest.approx(1 / q, rel=1e-12)
    assert arc_weight(2, 2) == pytest.approx(0.5)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_arc_weight_table_matches_literal_sum(k):
    table = arc_weights(k, 400)
    for q in range(1, 401):
        assert table[q] == pytest.approx(arc_weight(k, q), rel=1e-10, abs=1e-15)


@given(st.integers(2, 5), st.integers(1, 3000))
def test_arc_weight_bound(k, q):
    assert abs(arc_weight(k, q)) <= arc_weight_bound(k, q) * (1 + 1e-12)


@given(st.integers(2, 4), st.integers(1, 2000))
def test_non_squarefree_q1_drop_out(k, q):
    full = math.fsum(mobius(q1) * a_coeff(k, q // q1, q1) / ((q // q1) * euler_phi(q1)) for q1 in divisors(q))
    assert full == pytest.approx(arc_weight(k, q), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("k,l", [(2, 2), (2, 3), (3, 4)])
def test_truncation_at_one(k, l):
    v = singular_series(5, k, l, 1).value
    assert v == pytest.approx(1 / (math.factorial(k - 1) * math.factorial(l - 1)))


@pytest.mark.parametrize("k,l", [(2, 2), (2, 3), (3, 3)])
@pytest.mark.parametrize("Q", [100, 1000])
def test_successive_truncations_within_tail(k, l, Q):
    for h in range(1, 11):
        a = singular_series(h, k, l, Q)
        b = singular_series(h, k, l, 2 * Q)
        assert abs(a.value - b.value) <= a.tail_bound
        assert a.tail_bound >= 0


@pytest.mark.slow
def test_cauchy_up_to_ten_thousand():
    vals = [singular_series(6, 2, 2, Q) for Q in (100, 1000, 10**4)]
    for a, b in zip(vals, vals[1:]):
        assert abs(a.value - b.value) <= a.tail_bound


@pytest.mark.parametrize("h", [1, 2, 3, 6, 12])
def test_binary_constant(h, sigma_minus1):
    v = singular_series(h, 2, 2, 10**4)
    assert v.value == pytest.approx(6 / math.pi**2 * sigma_minus1(h), rel=1e-5)


def test_symmetric_in_shift():
    for h in range(1, 101):
        assert singular_series(h, 2, 3, 300).value == singular_series(-h, 2, 3, 300).value


def test_zero_shift_rejected():
    with pytest.raises(ValueError):
        singular_series(0, 2, 2, 100)


def test_value_serialises():
    v = singular_series(3, 2, 3, 200)
    assert SingularSeriesValue.from_dict(v.to_dict()) == v


def test_main_term_scaling():
    assert main_term(1, 2, 2, 1e8, 0, 100) == 0
    a = main_term(1, 2, 2, 1e8, 1e4, 100)
    assert main_term(1, 2, 2, 1e8, 3e4, 100) == pytest.approx(3 * a)
    assert a == pytest.approx(singular_series(1, 2, 2, 100).value * 1e4 * math.log(1e8) ** 2)


def test_p_poly_leading():
    assert p_poly_leading(2, 1, 1, math.e) == pytest.approx(1.0)
    for k in (2, 3, 4):
        r = p_poly_leading(k, 6, 5, 1e5**2) / p_poly_leading(k, 6, 5, 1e5)
        assert r == pytest.approx(2 ** (k - 1))


def test_p_poly_leading_against_long_average():
    x, Y = 10**6, 10**5
    avg = divisor_k_window(sieve_window(x + 1, Y), 2).values.mean()
    lead = p_poly_leading(2, 1, 1, x)
    assert abs(avg / lead - 1) <= 2 / math.log(x)


def test_m_weight():
    x = 1e7
    for k in (2, 3):
        assert m_weight(k, 1, x) == pytest.approx(math.log(x) ** (k - 1) / math.factorial(k - 1))
    assert m_weight(2, 2, x) == pytest.approx(0.5 * math.log(x))
    assert m_weight(3, 1, 1e8) > m_weight(3, 1, 1e7)
