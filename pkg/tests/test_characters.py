import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from divcorr.arith import euler_phi
from divcorr.characters import (
    character_table,
    characters_mod,
    gauss_type_sum,
    orthogonality_check,
    ramanujan_sum,
    ramanujan_sum_direct,
)


def test_modulus_one():
    (chi,) = characters_mod(1)
    assert chi.principal
    assert all(chi(n) == 1 for n in range(-5, 20))


def test_modulus_four():
    chars = characters_mod(4)
    assert len(chars) == 2
    (nontriv,) = [c for c in chars if not c.principal]
    assert nontriv(3) == pytest.approx(-1)


def test_modulus_five_values_are_fourth_roots():
    chars = characters_mod(5)
    assert len(chars) == 4
    roots = {1, 1j, -1, -1j}
    for c in chars:
        for n in range(1, 5):
            assert min(abs(c(n) - r) for r in roots) < 1e-12


def test_modulus_zero_rejected():
    with pytest.raises(ValueError):
        characters_mod(0)


@pytest.mark.parametrize("q", [1, 2, 8, 9, 12, 15, 16, 24, 32, 45, 63, 97, 100, 128, 210])
def test_character_invariants(q):
    chars = characters_mod(q)
    assert len(chars) == euler_phi(q)
    assert sum(c.principal for c in chars) == 1
    T = character_table(q)
    assert len({tuple(np.round(row, 9)) for row in T}) == len(chars)
    units = [n for n in range(q) if math.gcd(n, q) == 1]
    for c in chars:
        assert c(1) == pytest.approx(1, abs=1e-12)
        for n in range(q):
            if math.gcd(n, q) == 1:
                assert abs(abs(c(n)) - 1) < 1e-12
            else:
                assert c(n) == 0
        for a in units[:12]:
            for b in units[:12]:
                assert abs(c(a * b) - c(a) * c(b)) < 1e-12


def test_row_orthogonality_all_pairs():
    for q in range(1, 101):
        T = character_table(q)
        G = T @ T.conj().T
        assert np.abs(G - euler_phi(q) * np.eye(len(T))).max() < 1e-9


def test_ramanujan_examples():
    assert all(ramanujan_sum(1, h) == 1 for h in range(-10, 11))
    assert all(ramanujan_sum(q, 0) == euler_phi(q) for q in range(1, 200))
    assert ramanujan_sum(4, 2) == -2


@given(st.integers(1, 200), st.integers(-200, 200))
def test_ramanujan_matches_unit_sum(q, h):
    assert abs(ramanujan_sum(q, h) - ramanujan_sum_direct(q, h)) < 1e-9


@given(st.integers(1, 60), st.integers(1, 60), st.integers(-500, 500))
def test_ramanujan_multiplicative_in_q(q1, q2, h):
    if math.gcd(q1, q2) == 1:
        assert ramanujan_sum(q1 * q2, h) == ramanujan_sum(q1, h) * ramanujan_sum(q2, h)


def test_gauss_sum_principal_is_ramanujan():
    for q1 in range(1, 40):
        chi0 = next(c for c in characters_mod(q1) if c.principal)
        for a in range(-5, 30):
            assert abs(gauss_type_sum(chi0, a, q1) - ramanujan_sum(q1, a)) < 1e-9


def test_gauss_sum_trivial_modulus():
    (chi,) = characters_mod(1)
    assert gauss_type_sum(chi, 7, 1) == pytest.approx(1)


def test_gauss_sum_modulus_mismatch():
    with pytest.raises(ValueError):
        gauss_type_sum(characters_mod(5)[0], 1, 7)


def test_gauss_sum_square_root_bound():
    for q1 in range(1, 51):
        for chi in characters_mod(q1):
            for a in range(1, q1 + 1):
                if math.gcd(a, q1) == 1:
                    assert abs(gauss_type_sum(chi, a, q1)) <= 2 * math.sqrt(q1) + 1e-9


def test_gauss_sum_against_definition():
    chi = characters_mod(9)[3]
    direct = sum(cmath.exp(2j * cmath.pi * 2 * l / 9) * chi.conj(l) for l in range(9))
    assert abs(gauss_type_sum(chi, 2, 9) - direct) < 1e-12


def test_orthogonality_examples():
    assert orthogonality_check(7, 3, 3) == pytest.approx(6)
    assert abs(orthogonality_check(7, 3, 4)) < 1e-12
    assert orthogonality_check(12, 5, 17) == pytest.approx(4)
