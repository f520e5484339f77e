import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from halfduplex import relay
from halfduplex.capacity import ChannelGains, capacity, cut_set_bounds, relay_off_rate
from halfduplex.optimize import (
    GridSpec,
    gain_cf_closed,
    gain_df_closed,
    gain_estimate,
    intersect_t,
    line_crossing,
    maximize,
    maximize_batch,
    maximize_rows,
    optimize_all,
    optimize_cf,
    optimize_df,
    optimize_fb,
    optimize_odf,
    slope_df_closed,
    slope_estimate,
)

HP = math.pi / 2
COARSE = GridSpec(17, 3, 0.25)
amp = st.floats(0.05, 5)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(resolution=2)
    with pytest.raises(ValueError):
        GridSpec(shrink=1.0)


def test_maximize_concave_peak():
    res = maximize(lambda x: capacity(x * (2 - x)), {"x": (0.0, 2.0)})
    assert res.params["x"] == pytest.approx(1.0, abs=1e-4)
    assert res.rate == pytest.approx(0.5, abs=1e-9)
    assert res.evaluations > 0


def test_maximize_rejects_empty_box():
    with pytest.raises(ValueError):
        maximize(lambda: 0.0, {})
    with pytest.raises(ValueError):
        maximize(lambda x: x, {"x": (1.0, 0.0)})


def test_maximize_is_deterministic():
    f = lambda x, y: np.sin(3 * x) * np.cos(2 * y)
    a = maximize(f, {"x": (0, 2), "y": (0, 2)})
    b = maximize(f, {"x": (0, 2), "y": (0, 2)})
    assert a == b


def test_maximize_rows_and_batch_agree_with_scalar():
    centres = np.array([0.2, 0.5, 0.9])
    x, v = maximize_rows(lambda x: -(x - centres[:, None]) ** 2, 0, 1, 3)
    assert x == pytest.approx(centres, abs=1e-4)
    params, v = maximize_batch(
        lambda a, b: -(a - centres[:, None]) ** 2 - (b - 0.3) ** 2, {"a": (0, 1), "b": (0, 1)}, 3
    )
    assert params["a"] == pytest.approx(centres, abs=1e-3)
    assert params["b"] == pytest.approx(0.3, abs=1e-3)
    assert v == pytest.approx(0, abs=1e-5)


def test_line_crossing_example():
    c12, c13, cbf = capacity(4), capacity(1), capacity(4)
    t = intersect_t(0.0, c12, cbf, c13)
    assert t == pytest.approx(c12 / (c12 + cbf - c13), abs=1e-15)
    # published six-digit values carry a rounding slip in the fifth digit
    assert t == pytest.approx(0.637232, abs=5e-5)
    assert t * c12 == pytest.approx(0.739847, abs=1e-4)


def test_line_crossing_trivial_cases():
    assert intersect_t(0, 1, 0, 1) == 1.0
    assert intersect_t(0, 1, 2, 3) == 1.0
    assert intersect_t(2, 1, 2, 1) == 0.0
    with pytest.raises(ValueError):
        intersect_t(0, math.inf, 0, 1)


@given(*(st.floats(0, 5) for _ in range(4)))
def test_line_crossing_beats_dense_scan(a0, a1, b0, b1):
    t, v = line_crossing(a0, a1, b0, b1)
    ts = np.linspace(0, 1, 2001)
    scan = np.max(np.minimum(a0 + (a1 - a0) * ts, b0 + (b1 - b0) * ts))
    assert v >= scan - 1e-12
    assert v == pytest.approx(min(a0 + (a1 - a0) * t, b0 + (b1 - b0) * t), abs=1e-12)


def test_theorem1_examples():
    g = ChannelGains(1, 1, 5)
    assert optimize_df(g, 1).rate == pytest.approx(relay_off_rate(g, 1), abs=1e-4)
    g = ChannelGains(1, 2, 1)
    assert optimize_cf(g, 1).rate == pytest.approx(relay_off_rate(g, 1), abs=1e-4)


def test_results_reevaluate():
    g = ChannelGains(1.8, 1, 3)
    res = optimize_all(g, 1.0, COARSE)
    assert res["DF"].rate == relay.rate_df(g, 1.0, **res["DF"].params)
    assert res["CF"].rate == relay.rate_cf(g, 1.0, **res["CF"].params)
    assert res["FB"].rate == relay.rate_fb(g, 1.0, **res["FB"].params)
    assert res["ODF"].rate == relay.rate_odf(g, 1.0, **res["ODF"].params)


@pytest.mark.parametrize("h", [(2, 1, 1), (1.8, 1, 3), (3, 1, 0.5)])
def test_df_optimum_matches_brute_force(h):
    got = optimize_df(ChannelGains(*h), 1.0).rate
    brute = oracles.brute_df(*h, 1.0, n=31)
    assert got >= brute - 1e-9
    assert got <= brute + 5e-3


@pytest.mark.parametrize("h", [(1, 1, 3), (2, 1, 4)])
def test_cf_optimum_matches_brute_force(h):
    got = optimize_cf(ChannelGains(*h), 1.0).rate
    brute = oracles.brute_cf(*h, 1.0, n=151)
    assert got >= brute - 1e-6
    assert got <= brute + 2e-3


@settings(max_examples=25)
@given(amp, amp, amp, st.sampled_from([0.01, 1.0, 100.0]))
def test_containment_and_cut_set(h12, h13, h23, P):
    g = ChannelGains(h12, h13, h23)
    res = optimize_all(g, P, COARSE)
    r = {k: v.rate for k, v in res.items()}
    tol = 1e-9
    assert r["OFF"] <= r["DF"] + tol
    assert r["DF"] <= r["FB"] + tol
    assert r["OFF"] <= r["CF"] + tol
    assert r["ODF"] <= r["DF"] + tol
    bound = min(cut_set_bounds(g, P))
    assert max(r.values()) <= bound + tol


@settings(max_examples=25)
@given(amp, amp, amp, st.sampled_from([0.01, 1.0, 100.0]))
def test_theorem1_regions(h12, h13, h23, P):
    g = ChannelGains(h12, h13, h23)
    ro = relay_off_rate(g, P)
    if h12 <= h13:
        assert optimize_df(g, P, COARSE).rate == pytest.approx(ro, abs=1e-3)
    if h23 <= h13:
        assert optimize_cf(g, P, COARSE).rate == pytest.approx(ro, abs=1e-3)
    if h23 <= h12:
        assert optimize_fb(g, P, COARSE).rate <= optimize_df(g, P, COARSE).rate + 1e-3


def test_maximize_monotone_in_box():
    g = ChannelGains(2, 1, 2)
    f = lambda r12, theta2: relay.rate_df(g, 1.0, 0.6, r12, theta2)
    small = maximize(f, {"r12": (0, 0.3), "theta2": (0, 0.5)}).rate
    big = maximize(f, {"r12": (0, 1), "theta2": (0, HP)}).rate
    assert big >= small


def test_slope_relay_off_and_cf():
    g = ChannelGains(2, 1, 1)
    assert slope_estimate(lambda P: relay_off_rate(g, P)) == pytest.approx(1.0, rel=1e-3)
    assert slope_estimate(lambda P: optimize_cf(g, P).rate) == pytest.approx(1.0, rel=0.02)


def test_slope_df_closed_bounds():
    s = slope_df_closed(ChannelGains(2, 1, 1))
    assert (s.lower, s.upper) == pytest.approx((1.6, 1.75), abs=1e-12)
    assert s.lower - 1e-9 <= s.slope <= s.upper + 1e-9
    dead = slope_df_closed(ChannelGains(2, 1, 0))
    assert dead.slope == pytest.approx(1.0, abs=1e-9)
    assert dead.lower == pytest.approx(1.0) and dead.upper == pytest.approx(1.0)
    with pytest.raises(ValueError):
        slope_df_closed(ChannelGains(1, 2, 1))


def test_slope_df_numeric_matches_closed():
    g = ChannelGains(2, 1, 1)
    s = slope_estimate(lambda P: optimize_df(g, P).rate)
    assert s == pytest.approx(slope_df_closed(g).slope, rel=0.02)


def test_gain_relay_off():
    g = ChannelGains(1, 3, 1)
    assert gain_estimate(lambda P: relay_off_rate(g, P)) == pytest.approx(math.log2(9), abs=0.01)


def test_gain_closed_forms():
    assert gain_df_closed(ChannelGains(2, 1, 0)) == pytest.approx(0.0, abs=1e-9)
    assert gain_df_closed(ChannelGains(2, 1.5, 0)) == pytest.approx(math.log2(2.25), abs=1e-9)
    g = ChannelGains(1, 1, 3)
    assert gain_estimate(lambda P: optimize_cf(g, P).rate) == pytest.approx(gain_cf_closed(g), abs=0.05)
    with pytest.raises(ValueError):
        gain_df_closed(ChannelGains(1, 2, 1))


def test_gain_df_closed_matches_grid_oracle():
    g = ChannelGains(2, 1, 3)
    r = np.linspace(0, 1, 1001)[:, None]
    th = np.linspace(0, HP, 1001)[None, :]
    c, s = np.cos(th), np.sin(th)
    f1 = c * c + 2 * r * 3 * c * s + 9 * s * s
    f2 = (1 - r * r) * c * c
    with np.errstate(divide="ignore", invalid="ignore"):
        la, lc = np.log2(f1), np.log2(f2)
        val = (la * 2 - lc * 0) / (la + 2 - lc)
    val = np.where(np.isfinite(val) & (f1 > f2) & (f2 > 0), val, 0.0)
    assert gain_df_closed(g) == pytest.approx(float(np.max(np.maximum(val, 0.0))), abs=1e-3)


def test_odf_optimum_is_closed_form():
    g = ChannelGains(2, 1, 3)
    res = optimize_odf(g, 1.0)
    c12, c13, c23 = capacity(4), capacity(1), capacity(9)
    t = c23 / (c12 - c13 + c23)
    assert res.rate == pytest.approx(t * c12, abs=1e-12)
