import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2speckle.errors import InvalidArgumentError, ResourceLimitError
from g2speckle.geometry import generate_chain
from g2speckle.structure import (
    MAX_ORDER,
    ScatteringVector,
    chain_structure_factor,
    combine_partitions,
    enumerate_partitions,
    generalized_structure_factor,
    generalized_structure_factor_bruteforce,
    stirling_falling_factorial_check,
    structure_factor,
    structure_factor_orders,
    unsigned_stirling_from_partitions,
)


def test_scattering_vector():
    sv = ScatteringVector((1.0, 0.0, 0.0))
    np.testing.assert_array_equal(sv.k, [1.0, 0.0, -1.0])
    with pytest.raises(InvalidArgumentError):
        ScatteringVector((1.0, 1.0, 0.0))


def test_forward_and_bound(rng):
    pos = rng.uniform(-5, 5, (30, 3))
    assert structure_factor(pos, np.zeros(3)) == pytest.approx(30)
    for _ in range(20):
        assert abs(structure_factor(pos, rng.standard_normal(3))) <= 30 + 1e-9


def test_chain_closed_form_matches_sum():
    chain = generate_chain(17, 1.0)
    for phi in (0.1, 1.0, 2 * np.pi / 17, 3.0):
        assert abs(structure_factor(chain, [phi, 0, 0]) - chain_structure_factor(17, phi)) < 1e-12


def test_chain_roots_and_limits():
    assert abs(chain_structure_factor(100, 2 * np.pi / 100)) < 1e-12
    assert chain_structure_factor(100, 0.0) == 100
    assert chain_structure_factor(100, 4 * np.pi) == 100
    # odd N at pi leaves one uncancelled term
    assert chain_structure_factor(99, np.pi) == pytest.approx(-1)
    # at phi = 2 pi q/(N-1), S = e^{i phi}
    phi = 2 * np.pi * 5 / 99
    assert abs(chain_structure_factor(100, phi) - np.exp(1j * phi)) < 1e-12


def test_orders_shape(rng):
    out = structure_factor_orders(rng.uniform(size=(4, 3)), rng.standard_normal((7, 3)), 3)
    assert out.shape == (3, 7)


# {{{ partitions


def test_partitions_of_four():
    terms = enumerate_partitions(4)
    assert len(terms) == 5
    got = [(t.parts(), t.coefficient) for t in terms]
    assert got == [
        ((1, 1, 1, 1), 1),
        ((2, 1, 1), -6),
        ((2, 2), 3),
        ((3, 1), 8),
        ((4,), -6),
    ]


@pytest.mark.parametrize("m, p", [(1, 1), (2, 2), (3, 3), (4, 5), (5, 7), (6, 11), (10, 42), (12, 77)])
def test_partition_counts(m, p):
    terms = enumerate_partitions(m)
    assert len(terms) == p
    assert sum(t.cardinality for t in terms) == math.factorial(m)
    for t in terms:
        assert sum(j * c for j, c in enumerate(t.counts, start=1)) == m


def test_order_guard():
    with pytest.raises(InvalidArgumentError):
        enumerate_partitions(0)
    with pytest.raises(InvalidArgumentError):
        enumerate_partitions(MAX_ORDER + 1)
    with pytest.raises(InvalidArgumentError):
        enumerate_partitions(2.0)
    assert len(enumerate_partitions(MAX_ORDER + 1, allow_large=True)) == 101


def test_as_dict():
    d = enumerate_partitions(2)[1].as_dict()
    assert d == {"m": 2, "counts": [0, 1], "parts": [2], "cardinality": 1, "sign": -1}


def test_low_orders_explicit(rng):
    pos = rng.uniform(-3, 3, (6, 3))
    k = rng.standard_normal(3)
    S1, S2, S3 = structure_factor_orders(pos, k, 3)[:, 0]
    assert generalized_structure_factor(pos, k, 1) == pytest.approx(S1)
    assert generalized_structure_factor(pos, k, 2) == pytest.approx(S1**2 - S2)
    assert generalized_structure_factor(pos, k, 3) == pytest.approx(S1**3 - 3 * S1 * S2 + 2 * S3)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_partition_formula_matches_bruteforce(rng, m):
    for _ in range(15):
        n = int(rng.integers(1, 9))
        pos = rng.uniform(-4, 4, (n, 3))
        k = rng.standard_normal(3)
        a = generalized_structure_factor(pos, k, m)
        b = generalized_structure_factor_bruteforce(pos, k, m)
        assert abs(a - b) <= 1e-10 * max(abs(b), 1.0)


def test_fewer_emitters_than_order_vanishes(rng):
    pos = rng.uniform(-4, 4, (3, 3))
    assert abs(generalized_structure_factor(pos, rng.standard_normal(3), 4)) < 1e-10


def test_bruteforce_guard():
    with pytest.raises(ResourceLimitError):
        generalized_structure_factor_bruteforce(np.zeros((101, 3)), np.zeros(3), 4)


def test_forward_gives_falling_factorial():
    pos = np.random.Generator(np.random.Philox(1)).uniform(size=(9, 3))
    for m in range(1, 6):
        assert generalized_structure_factor(pos, np.zeros(3), m).real == pytest.approx(math.perm(9, m))


def test_combine_broadcasts(rng):
    sv = rng.standard_normal((3, 4, 5)) + 0j
    out = combine_partitions(sv, 3)
    assert out.shape == (4, 5)
    assert out[1, 2] == pytest.approx(combine_partitions(sv[:, 1, 2], 3))


# }}}


def test_stirling_table():
    assert unsigned_stirling_from_partitions(4) == [0, 6, 11, 6, 1]
    assert stirling_falling_factorial_check(6, 10) == (151200, 151200)


@given(st.integers(1, 6), st.integers(0, 10**6))
@settings(max_examples=200, deadline=None)
def test_stirling_identity_exact(m, n):
    ff, rhs = stirling_falling_factorial_check(m, n)
    assert ff == rhs


def test_stirling_guard():
    with pytest.raises(InvalidArgumentError):
        stirling_falling_factorial_check(3, 10**6 + 1)
