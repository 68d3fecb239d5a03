"""Pair-partition enumeration against closed forms and limit functionals."""

import math

import pytest

from syklab.errors import ResourceGuardError
from syklab.moments import (
    PairPartition,
    catalan_number,
    covariance_limit,
    crossing_number,
    double_factorial_odd,
    limit_mean_functional,
    limit_variance,
    m_k_a,
    pair_partitions,
)
from syklab.spectrum import Polynomial


def test_pair_partition_counts():
    assert len(pair_partitions(2)) == 1
    assert len(pair_partitions(4)) == 3
    assert len(pair_partitions(8)) == 105
    assert pair_partitions(5) == []
    assert len(pair_partitions(0)) == 1


def test_pair_partitions_are_distinct():
    parts = pair_partitions(6)
    assert len({p.blocks for p in parts}) == 15


def test_crossing_numbers():
    assert crossing_number(PairPartition.from_pairs((1, 2), (3, 4))) == 0
    assert crossing_number(PairPartition.from_pairs((1, 3), (2, 4))) == 1
    assert crossing_number(PairPartition.from_pairs((1, 4), (2, 5), (3, 6))) == 3


def test_crossing_number_matches_bruteforce(rng):
    for p in pair_partitions(8):
        brute = 0
        blocks = p.blocks
        for i in range(4):
            for j in range(4):
                a, b = blocks[i]
                c, d = blocks[j]
                if a < c < b < d:
                    brute += 1
        assert crossing_number(p) == brute


def test_m2_is_one_for_all_a():
    for a in (0.0, 0.5, 3.0, math.inf):
        assert m_k_a(2, a) == 1.0


def test_m4_closed_form():
    for a in (0.1, 1.0, 10.0):
        assert m_k_a(4, a) == pytest.approx(2.0 + math.exp(-2.0 * a), abs=1e-12)


def test_endpoints_match_enumeration_k_up_to_12():
    for k in range(0, 13, 2):
        parts = pair_partitions(k)
        assert len(parts) == double_factorial_odd(k)
        noncrossing = sum(1 for p in parts if crossing_number(p) == 0)
        assert noncrossing == catalan_number(k // 2)
        assert m_k_a(k, 0.0) == float(double_factorial_odd(k))
        assert m_k_a(k, math.inf) == float(catalan_number(k // 2))


def test_m6_endpoint_values():
    assert m_k_a(6, 0.0) == 15.0
    assert m_k_a(6, math.inf) == 5.0


def test_odd_k_vanishes():
    for a in (0.0, 1.0, math.inf):
        assert m_k_a(3, a) == 0.0
        assert m_k_a(7, a) == 0.0


def test_monotone_nonincreasing_in_a():
    grid = [0.0, 0.05, 0.2, 1.0, 4.0, math.inf]
    for k in (4, 6, 8):
        vals = [m_k_a(k, a) for a in grid]
        assert all(x >= y - 1e-12 for x, y in zip(vals, vals[1:]))


def test_argument_errors():
    with pytest.raises(ValueError):
        m_k_a(4, -0.5)
    with pytest.raises(ValueError):
        m_k_a(-2, 1.0)
    with pytest.raises(ResourceGuardError):
        m_k_a(22, 1.0)


def test_limit_mean_functional_examples():
    x2 = Polynomial((0.0, 0.0, 1.0))
    for a in (0.0, 1.0, math.inf):
        assert limit_mean_functional(x2, a) == 1.0
    assert limit_mean_functional(Polynomial((5.0,)), 1.0) == 0.0
    x4 = Polynomial((0.0, 0.0, 0.0, 0.0, 1.0))
    assert limit_mean_functional(x4, 0.0) == 6.0


def test_limit_variance_examples():
    x2 = Polynomial((0.0, 0.0, 1.0))
    assert limit_variance(x2, 0.7, 3.0) == pytest.approx(2.0)
    assert limit_variance(Polynomial((0, 1, 2, 3)), 1.0, 1.0) == 0.0
    x4 = Polynomial((0.0, 0.0, 0.0, 0.0, 1.0))
    assert limit_variance(x4, 0.0, 3.0) == pytest.approx(72.0)
    with pytest.raises(ValueError):
        limit_variance(x2, 1.0, 0.5)


def test_covariance_limit_examples():
    assert covariance_limit(2, 2, 0.3, 3.0) == pytest.approx(2.0)
    assert covariance_limit(2, 3, 1.0, 7.0) == 0.0
    assert covariance_limit(4, 4, 0.0, 3.0) == pytest.approx(72.0)


def test_covariance_limit_consistent_with_variance():
    for k in (2, 4, 6):
        f = Polynomial((0.0,) * k + (1.0,))
        for a in (0.0, 0.8, math.inf):
            assert covariance_limit(k, k, a, 3.0) == pytest.approx(limit_variance(f, a, 3.0))


def test_pair_partition_validation():
    with pytest.raises(ValueError):
        PairPartition(((1, 2), (2, 3)))  # overlap
    with pytest.raises(ValueError):
        PairPartition(((2, 1),))  # not increasing
    with pytest.raises(ValueError):
        PairPartition(((1, 3),))  # does not cover 1..2


def test_moment_value_range(rng):
    # for even k the value interpolates between Catalan and (k-1)!!
    for k in (2, 4, 6, 8):
        for a in rng.uniform(0.01, 8.0, 5):
            v = m_k_a(k, float(a))
            assert catalan_number(k // 2) <= v <= double_factorial_odd(k)
