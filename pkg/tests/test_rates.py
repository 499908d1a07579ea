import math

import pytest
from hypothesis import given, settings, strategies as st

from qkim.model import ModelParams, SpinConfig, spin
from qkim.rates import (
    check_detailed_balance,
    clamp_rate,
    glauber_rate,
    rate_matrix,
    v_matrix,
    v_rate,
)

params_strategy = st.builds(
    ModelParams.from_gamma,
    st.integers(min_value=3, max_value=6),
    st.floats(min_value=0.0, max_value=1.0),
    delta=st.floats(min_value=-1.0, max_value=1.0),
)


def test_rate_at_infinite_temperature_is_flat():
    p = ModelParams.from_gamma(5, 0.0, delta=0.0, Gamma=1.7)
    for bits in range(32):
        for i in range(5):
            assert glauber_rate(SpinConfig(bits, 5), i, p) == 1.7


def test_rate_closed_form_values():
    p = ModelParams.from_gamma(4, 0.6, delta=0.25, Gamma=2.0)
    # aligned-up neighbors: flipping an aligned spin costs, a defect relaxes
    assert glauber_rate(SpinConfig(0, 4), 1, p) == pytest.approx(2.0 * 1.25 * 0.4)
    assert glauber_rate(SpinConfig(0b0010, 4), 1, p) == pytest.approx(2.0 * 1.25 * 1.6)
    # opposite neighbors: gamma drops out
    assert glauber_rate(SpinConfig(0b0100, 4), 1, p) == pytest.approx(2.0 * 0.75)


@settings(max_examples=120, deadline=None)
@given(params_strategy, st.integers(min_value=0))
def test_rates_nonnegative(p, seed):
    bits = seed % (1 << p.n_sites)
    c = SpinConfig(bits, p.n_sites)
    for i in range(p.n_sites):
        assert glauber_rate(c, i, p) >= 0.0


def test_rate_matrix_matches_scalar_rate():
    p = ModelParams.from_gamma(5, 0.8, delta=-0.6, Gamma=1.3)
    w = rate_matrix(p)
    for bits in range(32):
        c = SpinConfig(bits, 5)
        for i in range(5):
            assert w[bits, i] == pytest.approx(glauber_rate(c, i, p), abs=1e-15)


def test_rate_matrix_custom_rate_path():
    p = ModelParams.from_gamma(3, 0.5)

    def flat(config, i, params):
        return 2.0 + 0.5 * spin(config, i)

    w = rate_matrix(p, flat)
    assert w.shape == (8, 3)
    assert w[0, 0] == 2.5 and w[1, 0] == 1.5


def test_detailed_balance_holds_on_consistent_params():
    for g in (0.0, 0.25, 0.5, 0.75, 0.95):
        for d in (-1.0, -0.5, 0.0, 0.5, 1.0):
            report = check_detailed_balance(glauber_rate, ModelParams.from_gamma(6, g, delta=d))
            assert report.holds, (g, d, report.max_violation)
            assert report.max_violation < 1e-12


@settings(max_examples=60, deadline=None)
@given(params_strategy)
def test_detailed_balance_property(p):
    assert check_detailed_balance(glauber_rate, p).max_violation < 1e-11


def test_detailed_balance_detects_mismatched_pair():
    broken = ModelParams(6, gamma=0.6, beta=0.0)
    report = check_detailed_balance(glauber_rate, broken)
    assert not report.holds
    assert report.max_violation > 0.1


def test_rates_require_periodic_boundary():
    p = ModelParams(4, boundary="open")
    with pytest.raises(ValueError):
        glauber_rate(SpinConfig(0, 4), 0, p)
    with pytest.raises(ValueError):
        rate_matrix(p)


def test_v_rate_is_flip_symmetric_combination():
    """v_i equals sqrt(w_i(sigma) w_i(flipped sigma)) and ignores the spin at i."""
    p = ModelParams.from_gamma(5, 0.9, delta=0.4, Gamma=1.2)
    for bits in range(32):
        c = SpinConfig(bits, 5)
        for i in range(5):
            flipped = SpinConfig(bits ^ (1 << i), 5)
            prod = glauber_rate(c, i, p) * glauber_rate(flipped, i, p)
            assert v_rate(c, i, p) == pytest.approx(math.sqrt(prod), abs=1e-13)
            assert v_rate(c, i, p) == v_rate(flipped, i, p)


def test_v_rate_closed_form_at_criticality():
    p = ModelParams.from_gamma(4, 1.0, delta=0.3)
    assert v_rate(SpinConfig(0, 4), 1, p) == 0.0
    assert v_rate(SpinConfig(0b0100, 4), 1, p) == pytest.approx(0.7)


def test_v_matrix_matches_scalar():
    p = ModelParams.from_gamma(4, 0.7, delta=-0.5)
    v = v_matrix(p)
    for bits in range(16):
        for i in range(4):
            assert v[bits, i] == pytest.approx(v_rate(SpinConfig(bits, 4), i, p), abs=1e-15)


def test_clamp_rate():
    assert clamp_rate(-1e-16) == 0.0
    assert clamp_rate(0.5) == 0.5
    with pytest.raises(ValueError):
        clamp_rate(-1e-3)
