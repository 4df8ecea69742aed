import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoseries.multiindex import (
    MultiIndex,
    add_table,
    basis_size,
    check_derivative_identity,
    check_factorial_shift_identity,
    enumerate_multiindices,
    get_basis,
    rising_factorial_poly,
    stirling_unsigned,
)


def test_enumeration_count_and_order():
    idx = enumerate_multiindices(3, 4)
    assert len(idx) == basis_size(3, 4) == math.comb(7, 3)
    orders = [a.order for a in idx]
    assert orders == sorted(orders)
    assert len(set(idx)) == len(idx)


def test_enumeration_degree_zero():
    assert enumerate_multiindices(2, 0) == [MultiIndex((0, 0))]


def test_enumeration_limit():
    with pytest.raises(ValueError):
        enumerate_multiindices(10, 30, limit=1000)


def test_multiindex_arithmetic():
    a, b = MultiIndex((2, 1)), MultiIndex((1, 1))
    assert a + b == (3, 2)
    assert a - b == (1, 0)
    assert b <= a and not a <= b
    assert a.factorial == 2
    assert a.binom(b) == 2


def test_negative_entries_rejected():
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_basis_lookup_roundtrip():
    basis = get_basis(2, 5)
    for i, alpha in enumerate(basis.indices):
        assert basis.index(alpha) == i


def test_add_table_matches_direct_sum():
    basis = get_basis(2, 6)
    idx, binom = add_table(2, 6, 6)
    for i, a in enumerate(basis.indices[:10]):
        for j, b in enumerate(basis.indices[:10]):
            s = a + b
            assert idx[i, j] == (basis.index(s) if s.order <= 6 else -1)
            if idx[i, j] >= 0:
                assert binom[i, j] == s.binom(b)


def test_stirling_small_rows():
    t = stirling_unsigned(4)
    assert t[0] == (1,)
    assert t[3] == (0, 2, 3, 1)
    assert t[4] == (0, 6, 11, 6, 1)


@pytest.mark.parametrize("k", range(0, 16))
def test_stirling_row_sum(k):
    assert sum(stirling_unsigned(15)[k]) == math.factorial(k)


@given(k=st.integers(0, 20), z=st.fractions(min_value=-5, max_value=5, max_denominator=50))
@settings(max_examples=60, deadline=None)
def test_stirling_generating_identity_exact(k, z):
    row = stirling_unsigned(20)[k]
    assert sum(c * z**r for r, c in enumerate(row)) == rising_factorial_poly(k, z)


@pytest.mark.parametrize("k", range(0, 16))
def test_derivative_identity(k):
    assert check_derivative_identity(k)


@pytest.mark.parametrize("k", range(1, 9))
def test_factorial_shift_identity_integer_nodes(k):
    for x in range(-k, 1):
        assert check_factorial_shift_identity(k, x) == 0


@given(k=st.integers(1, 8), x=st.fractions(min_value=-4, max_value=4, max_denominator=30))
@settings(max_examples=50, deadline=None)
def test_factorial_shift_identity_rational_exact(k, x):
    assert check_factorial_shift_identity(k, Fraction(x)) == 0


@given(a=st.lists(st.integers(0, 5), min_size=3, max_size=3),
       b=st.lists(st.integers(0, 5), min_size=3, max_size=3))
def test_multiindex_binom_is_product_of_binomials(a, b):
    a, b = MultiIndex(a), MultiIndex(b)
    s = a + b
    assert s.binom(a) == np.prod([math.comb(x + y, x) for x, y in zip(a, b)])
