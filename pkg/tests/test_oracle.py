import pytest
from hypothesis import given
from hypothesis import strategies as st

from coclust.core import Instance, InstanceTooLarge, IntMatrix, candidate_costs, cost
from coclust.oracle import (
    bell,
    brute_force_decide,
    brute_force_optimal,
    enumerate_partitions,
    partitions_with_blocks,
    restricted_growth_strings,
    stirling2,
)

from helpers import SMALL_EXAMPLE, matrices


def test_partitions_of_three_into_at_most_two():
    got = [p.one_based() for p in enumerate_partitions(3, 2)]
    assert got == [[[1, 2, 3]], [[1, 2], [3]], [[1, 3], [2]], [[1], [2, 3]]]


def test_single_element():
    assert len(list(enumerate_partitions(1))) == 1


def test_bell_four():
    assert len(list(enumerate_partitions(4, 4))) == 15 == bell(4)


@given(st.integers(1, 7), st.data())
def test_counts_match_stirling_and_bell(n, data):
    k = data.draw(st.integers(1, n))
    rgs = list(restricted_growth_strings(n))
    assert len(rgs) == len(set(rgs)) == bell(n)
    assert len(list(partitions_with_blocks(n, k))) == stirling2(n, k)
    assert sum(stirling2(n, j) for j in range(1, k + 1)) == len(list(enumerate_partitions(n, k)))


def test_rgs_are_canonical():
    for s in restricted_growth_strings(5):
        assert s[0] == 0
        assert all(s[i] <= max(s[:i]) + 1 for i in range(1, len(s)))


def test_example_decide():
    cc = brute_force_decide(Instance(SMALL_EXAMPLE, 2, 2, 1))
    assert cc is not None and cost(SMALL_EXAMPLE, cc) <= 1
    assert brute_force_decide(Instance(SMALL_EXAMPLE, 2, 2, 0)) is None


def test_tiny():
    assert brute_force_decide(Instance(IntMatrix([[3]]), 1, 1, 0)) is not None


@pytest.mark.parametrize("rows,k,l,expected", [
    (SMALL_EXAMPLE.rows, 2, 2, 1),
    ([[4, 4], [4, 4]], 2, 2, 0),
    ([[0, 9], [9, 0]], 1, 1, 9),
])
def test_optimal(rows, k, l, expected):
    assert brute_force_optimal(IntMatrix(rows), k, l) == expected


def test_guard():
    A = IntMatrix([[i * 12 + j for j in range(12)] for i in range(12)])
    with pytest.raises(InstanceTooLarge):
        brute_force_decide(Instance(A, 4, 4, 0))


@given(matrices(max_m=3, max_n=4), st.data())
def test_self_consistent(A, data):
    k = data.draw(st.integers(1, A.m))
    l = data.draw(st.integers(1, A.n))
    best = brute_force_optimal(A, k, l)
    cc = brute_force_decide(Instance(A, k, l, best))
    assert cc is not None and cost(A, cc) == best and (cc.k, cc.l) == (k, l)
    below = [c for c in candidate_costs(A) if c < best]
    if below:
        assert brute_force_decide(Instance(A, k, l, below[-1])) is None
