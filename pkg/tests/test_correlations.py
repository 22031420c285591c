import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2speckle.correlations import (
    DriveParams,
    SteadyState,
    antibunch_from_abs2,
    correlation_bruteforce,
    correlation_record,
    g1,
    g2_antibunch_prediction,
    g2_closed_form,
    g2_destructive_prediction,
    g2_from_factors,
    g2_ordered_predictions,
    gm_leading_order,
)
from g2speckle.errors import DegenerateInputError, InvalidArgumentError, ResourceLimitError
from g2speckle.geometry import generate_chain


def chain_k(phi, d=1.0):
    """Scattering vector giving phase step ``phi`` on an x-chain."""
    return np.array([phi / d, 0.0, 0.0])


# {{{ steady state / drive


@pytest.mark.parametrize("s", np.logspace(-12, 12, 25))
def test_steady_state_invariants(s):
    ss = SteadyState.from_s(s)
    assert 0 < ss.p_ee < 0.5
    assert ss.coh < 0
    assert ss.coh**2 <= ss.p_ee * (1 - ss.p_ee) * (1 + 1e-12)
    if s <= 0.1:
        assert abs(ss.coh + math.sqrt(s / 2)) <= 2 * s**1.5


def test_drive_validation():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(InvalidArgumentError):
            DriveParams(bad)
    with pytest.raises(InvalidArgumentError):
        DriveParams(1.0, (0, 0, 2))


# }}}


def test_g1_values():
    pos = generate_chain(10, 1.0)
    norm, phys = g1(pos, DriveParams(0.5), np.zeros(3))
    assert norm == pytest.approx(0.5 * 10 + 100)
    assert phys == pytest.approx(0.5 / (2 * 1.5**2) * norm)


def test_single_emitter_never_pairs(rng):
    for s in (1e-9, 1e-3, 1.0, 1e6):
        for _ in range(5):
            assert g2_closed_form([[0, 0, 0]], s, rng.standard_normal(3)) == 0.0


def test_two_atom_pair_destructive():
    pos = [[0, 0, 0], [np.pi, 0, 0]]
    for s in (1e-4, 1e-2, 1.0):
        g = g2_closed_form(pos, s, [1.0, 0, 0])
        assert g == pytest.approx((1 + 1 / s) ** 2, rel=1e-12)
        assert correlation_bruteforce(pos, s, [1.0, 0, 0]) == pytest.approx(g, rel=1e-9)


def test_frozen_values():
    # independent hand evaluation of the closed form for N=3 at a chosen k
    pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.5, 0.0], [-0.3, 2.0, 1.0]])
    k = np.array([0.4, -0.7, 0.2])
    s = 0.05
    z = np.exp(1j * pos @ k)
    S1, S2, n = z.sum(), (z**2).sum(), 3
    num = 2 * s * n * (2 + s * (n - 1)) + 4 * s * (n - 2) * abs(S1) ** 2 + abs(S1**2 - S2) ** 2
    expect = num / (s * n + abs(S1) ** 2) ** 2
    assert g2_closed_form(pos, s, k) == pytest.approx(expect, rel=1e-13)
    assert g2_closed_form(pos, s, k) == pytest.approx(0.69504768491601880, rel=1e-12)


def test_closed_form_matches_oracle(rng):
    for s in (1e-6, 1e-2, 1.0, 10.0):
        for n in (2, 5, 8):
            pos = rng.uniform(-3, 3, (n, 3))
            for _ in range(5):
                k = rng.standard_normal(3)
                a = g2_closed_form(pos, s, k)
                b = correlation_bruteforce(pos, s, k)
                assert abs(a - b) <= 1e-9 * max(a, 1e-30)


def test_oracle_nonnegative_higher_orders(rng):
    for m in (2, 3, 4):
        pos = rng.uniform(-3, 3, (5, 3))
        for s in (1e-4, 0.3, 5.0):
            assert correlation_bruteforce(pos, s, rng.standard_normal(3), m) >= -1e-12


def test_oracle_guards():
    with pytest.raises(ResourceLimitError):
        correlation_bruteforce(np.zeros((20, 3)), 0.1, np.zeros(3), 4)
    assert correlation_bruteforce(np.zeros((3, 3)), 0.1, np.zeros(3), 1) == 1.0


def test_degenerate_intensity():
    with pytest.raises(DegenerateInputError):
        g2_from_factors(0.0, 0.0, 1, 1e-40)


def test_chaotic_limit(cloud100):
    g = g2_closed_form(cloud100, 1e8, [1.0, 0, -1.0])
    assert g == pytest.approx(2 - 2 / 100, rel=1e-5)


def test_forward_coherent_limit(cloud100):
    g = g2_closed_form(cloud100, 1e-10, np.zeros(3))
    assert g == pytest.approx((1 - 1 / 100) ** 2, rel=1e-6)


# {{{ ordered chain predictions


def test_destructive_chain_prediction():
    chain = generate_chain(100, 1.0)
    k = chain_k(2 * np.pi / 100)
    g = g2_closed_form(chain, 1e-3, k)
    pred = g2_ordered_predictions(100, 1e-3, "destructive")
    assert pred == pytest.approx(41.98, rel=1e-12)
    assert g == pytest.approx(pred, rel=1e-6)
    assert g2_destructive_prediction(chain, 1e-3, k) == pytest.approx(pred, rel=1e-6)


def test_antibunch_chain_prediction():
    chain = generate_chain(100, 1.0)
    k = chain_k(2 * np.pi / 99)
    s = 1e-8
    assert g2_closed_form(chain, s, k) / (8 * s * 100) == pytest.approx(1.0, abs=0.05)
    assert g2_antibunch_prediction(chain, s, k) == pytest.approx(4 * s * 100 * 2, rel=1e-9)


def test_even_exception():
    chain = generate_chain(100, 1.0)
    vals = [g2_closed_form(chain, s, chain_k(np.pi)) * s**2 for s in (1e-8, 1e-7, 1e-6)]
    assert max(vals) / min(vals) - 1 < 0.01
    assert g2_ordered_predictions(100, 1e-7, "even_exception") == pytest.approx(
        g2_closed_form(chain, 1e-7, chain_k(np.pi)), rel=1e-9
    )
    with pytest.raises(InvalidArgumentError):
        g2_ordered_predictions(99, 1e-7, "even_exception")


def test_prediction_argument_checks():
    with pytest.raises(InvalidArgumentError):
        g2_ordered_predictions(1, 1e-3, "destructive")
    with pytest.raises(InvalidArgumentError):
        g2_ordered_predictions(10, 1e-3, "nope")


def test_antibunch_formula_limits():
    assert antibunch_from_abs2(1.0, 100, 1e-6) == pytest.approx(8e-4)
    assert antibunch_from_abs2(100.0, 100, 1e-6) == pytest.approx(4e-6 * 101 / 100)
    with pytest.raises(DegenerateInputError):
        antibunch_from_abs2(0.0, 10, 1e-6)


def test_scaling_exponents_on_chain():
    ss = (1e-8, 1e-7, 1e-6)
    # S = 0 with S(2k) = N != 0: even chain at phi = pi
    even = generate_chain(100, 1.0)
    sup = [g2_closed_form(even, s, chain_k(np.pi)) * s**2 for s in ss]
    assert max(sup) / min(sup) - 1 < 0.01
    # S = S(2k) = 0 leaves only the 4/(sN) term
    chain = generate_chain(99, 1.0)
    dest = [g2_closed_form(chain, s, chain_k(2 * np.pi / 99)) * s for s in ss]
    assert max(dest) / min(dest) - 1 < 0.01
    # S^(2) = 0 at phi = 2 pi/(N-1)
    anti = [g2_closed_form(chain, s, chain_k(2 * np.pi / 98)) / s for s in ss]
    assert max(anti) / min(anti) - 1 < 0.01


# }}}


def test_gm_leading_order_matches_g2_at_small_s(rng):
    pos = rng.uniform(-3, 3, (6, 3))
    k = rng.standard_normal(3)
    s = 1e-9
    assert gm_leading_order(pos, s, k, 2) == pytest.approx(g2_closed_form(pos, s, k), rel=1e-6)


def test_gm_leading_order_vs_oracle_m3(rng):
    pos = rng.uniform(-3, 3, (5, 3))
    k = rng.standard_normal(3)
    s = 1e-7
    assert gm_leading_order(pos, s, k, 3) == pytest.approx(correlation_bruteforce(pos, s, k, 3), rel=1e-4)


def test_record(cloud100):
    drive = DriveParams(1e-6)
    rec = correlation_record(cloud100, drive, (0.0, 0.0, 1.0), orders=(2, 3))
    assert rec.g1_normalized == pytest.approx(1e-4 + 100**2)
    assert rec.g2 == pytest.approx((1 - 1 / 100) ** 2, rel=1e-3)
    assert set(rec.gm) == {3}


@given(
    st.integers(1, 6),
    st.floats(1e-6, 10.0),
    st.tuples(*[st.floats(-3, 3)] * 3),
    st.integers(0, 2**32 - 1),
)
@settings(max_examples=60, deadline=None)
def test_closed_form_equals_oracle_property(n, s, k, seed):
    pos = np.random.Generator(np.random.Philox(seed)).uniform(-2, 2, (n, 3))
    a = g2_closed_form(pos, s, k)
    b = correlation_bruteforce(pos, s, k)
    assert a >= 0
    assert abs(a - b) <= 1e-9 * max(a, 1e-30) + 1e-15
