import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfduplex.capacity import LOG2E, ChannelGains, capacity, cut_set_bounds, db_to_amplitude, relay_off_rate

snr = st.floats(0, 1e6, allow_nan=False)
gain = st.floats(0, 30, allow_nan=False)


@pytest.mark.parametrize("x, want", [(0, 0.0), (3, 1.0), (1, 0.5)])
def test_capacity_values(x, want):
    assert capacity(x) == pytest.approx(want, abs=1e-15)


def test_capacity_rejects_negative_and_nan():
    with pytest.raises(ValueError):
        capacity(-1e-9)
    with pytest.raises(ValueError):
        capacity(float("nan"))


def test_capacity_arrays_and_inf():
    out = capacity(np.array([0.0, 3.0, np.inf]))
    assert out.tolist() == [0.0, 1.0, math.inf]


@given(snr, snr)
def test_capacity_concave(x, y):
    assert capacity((x + y) / 2) >= (capacity(x) + capacity(y)) / 2 - 1e-12


@given(snr, snr)
def test_capacity_monotone(x, y):
    lo, hi = sorted((x, y))
    assert capacity(lo) <= capacity(hi)


@pytest.mark.parametrize("x", [1e-3, 1e-5, 1e-8])
def test_capacity_low_snr_linear(x):
    assert capacity(x) == pytest.approx(x / 2 * LOG2E, rel=1e-2)


def test_relay_off_examples():
    assert relay_off_rate(ChannelGains(0, 1, 0), 3) == pytest.approx(1.0)
    assert relay_off_rate(ChannelGains(1, 0, 1), 5) == 0.0
    assert relay_off_rate(ChannelGains(0, 2, 0), 1) == pytest.approx(0.5 * math.log2(5), abs=1e-12)
    assert relay_off_rate(ChannelGains(0, 2, 0), 1) == pytest.approx(1.160964, abs=1e-6)


def test_cut_set_examples():
    assert cut_set_bounds(ChannelGains(1, 1, 1), 1) == pytest.approx((0.792481, 0.792481), abs=1e-6)
    assert cut_set_bounds(ChannelGains(0, 1, 0), 3) == pytest.approx((1.0, 1.0))
    assert cut_set_bounds(ChannelGains(2, 1, 3), 1) == pytest.approx((1.729716, 1.292481), abs=1e-6)


@given(gain, gain, gain, st.floats(0, 1e4))
def test_relay_off_below_cut_set(h12, h13, h23, P):
    g = ChannelGains(h12, h13, h23)
    r = relay_off_rate(g, P)
    assert all(r <= b for b in cut_set_bounds(g, P))


@pytest.mark.parametrize("bad", [(-1, 1, 1), (1, math.inf, 1), (1, 1, math.nan)])
def test_gains_validated(bad):
    with pytest.raises(ValueError):
        ChannelGains(*bad)


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        relay_off_rate(ChannelGains(1, 1, 1), -1)


def test_gain_helpers():
    g = ChannelGains.from_db(20, 0, -20)
    assert (g.h12, g.h13, g.h23) == pytest.approx((10, 1, 0.1))
    assert g.g12 == pytest.approx(100)
    assert db_to_amplitude(23) == pytest.approx(14.125, abs=1e-3)
    s = ChannelGains(1, 2, 3).swap_receivers()
    assert (s.h12, s.h13, s.h23) == (2, 1, 3)
    assert ChannelGains(1, 2, 3).link(3, 2) == 3
    with pytest.raises(ValueError):
        ChannelGains(1, 2, 3).link(1, 1)
