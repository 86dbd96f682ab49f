from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdastap.coprime import (
    CoprimePair,
    brute_force_distinct_sums,
    build_coprime_set,
    coprime_set,
    count_distinct_sums,
    holes,
    lag_structure,
)
from fdastap.errors import BadOrder, NonCoprime


def coprime_pairs(max_value=8, ordered=True):
    def ok(p):
        m, n = p
        return gcd(m, n) == 1 and (m < n if ordered else True)

    return st.tuples(st.integers(1, max_value), st.integers(1, max_value)).filter(ok)


@pytest.mark.parametrize(
    "m, n, expected",
    [
        (2, 3, [0, 2, 3, 4, 6, 9]),
        (1, 2, [0, 1, 2]),
        (3, 4, [0, 3, 4, 6, 8, 9, 12, 16, 20]),
    ],
)
def test_known_sets(m, n, expected):
    s = coprime_set(m, n)
    assert list(s.indices) == expected
    assert s.cardinality == n + 2 * m - 1


def test_rejects_bad_pairs():
    with pytest.raises(NonCoprime):
        CoprimePair(2, 4)
    with pytest.raises(BadOrder):
        build_coprime_set(CoprimePair(3, 2))
    with pytest.raises(NonCoprime):
        count_distinct_sums(2, 4, 3, 3)


def test_contiguous_bounds():
    assert lag_structure(coprime_set(2, 3)).contiguous_bound == 7
    assert lag_structure(coprime_set(1, 2)).contiguous_bound == 2


def test_lag_seven_uses_nine_and_two():
    s = coprime_set(2, 3)
    lags = lag_structure(s)
    pairs = lags.selection_map[7]
    values = {(s.indices[a], s.indices[b]) for a, b in pairs}
    assert (9, 2) in values


def test_zero_lag_count_equals_cardinality():
    s = coprime_set(2, 3)
    assert len(lag_structure(s).selection_map[0]) == s.cardinality


@given(coprime_pairs())
def test_difference_set_covers_contiguous_range(pair):
    m, n = pair
    s = coprime_set(m, n)
    idx = np.array(s.indices)
    diffs = set((idx[:, None] - idx[None, :]).ravel().tolist())
    bound = m * n + m - 1
    assert set(range(-bound, bound + 1)) <= diffs
    lags = lag_structure(s)
    assert lags.contiguous_bound == bound
    assert all(len(lags.selection_map[l]) > 0 for l in range(-bound, bound + 1))


@given(coprime_pairs())
def test_averaging_operator_rows_sum_to_one(pair):
    lags = lag_structure(coprime_set(*pair))
    op = lags.averaging_operator()
    assert np.allclose(op.sum(axis=(1, 2)), 1.0)


@pytest.mark.parametrize(
    "m, n, l_max, p_max, expected",
    [(1, 1, 7, 7, 15), (3, 4, 7, 7, 44), (1, 2, 5, 4, 5 + 8 + 1)],
)
def test_distinct_sum_examples(m, n, l_max, p_max, expected):
    assert count_distinct_sums(m, n, l_max, p_max) == expected
    assert brute_force_distinct_sums(m, n, l_max, p_max) == expected


@given(coprime_pairs(ordered=False), st.integers(0, 12), st.integers(0, 12))
def test_distinct_sums_match_brute_force(pair, l_max, p_max):
    m, n = pair
    assert count_distinct_sums(m, n, l_max, p_max) == brute_force_distinct_sums(m, n, l_max, p_max)


@given(coprime_pairs(ordered=False), st.integers(0, 12), st.integers(0, 12))
def test_holes_are_symmetric(pair, l_max, p_max):
    m, n = pair
    top = l_max * m + p_max * n
    h = set(holes(m, n, l_max, p_max))
    assert h == {top - x for x in h}
