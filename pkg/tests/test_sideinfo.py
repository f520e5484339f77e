import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from halfduplex.capacity import ChannelGains, capacity
from halfduplex.optimize import GridSpec
from halfduplex.sideinfo import (
    SideInfoInstance,
    TauResult,
    _coop_fb_tau,
    energy_at,
    min_energy_coop,
    min_energy_degraded,
    tau_coop,
    tau_coop_fb,
    tau_coop_fb_opt,
    tau_degraded,
    tau_separate,
)

FIG12 = ChannelGains(2, 1, 90)
amp = st.floats(0.1, 10)
ent = st.floats(0, 2)
SPEC = GridSpec(17, 3, 0.25)


def inst(h, P, H12, H13):
    return SideInfoInstance(ChannelGains(*h), P, H12, H13)


def test_instance_validation():
    with pytest.raises(ValueError):
        inst((1, 1, 1), 1, -0.1, 0)
    with pytest.raises(ValueError):
        inst((1, 1, 1), -1, 0.1, 0)
    assert not TauResult(math.inf, math.inf, 0).feasible


def test_separate_examples():
    assert tau_separate(inst((1, 1, 1), 1, 0, 0)).tau == 0.0
    assert tau_separate(inst((2, 1, 1), 1, 0.9, 0.3)).tau == pytest.approx(1.8)
    assert tau_separate(inst((1, 1, 1), 3, 0.5, 0.5)).tau == pytest.approx(0.5)
    assert tau_separate(inst((1, 0, 1), 1, 0.5, 0.5)).tau == math.inf


def test_degraded_single_layer_cases():
    P = 1.0
    common = tau_degraded(inst((2, 1, 1), P, 0.4, 0.4))
    assert common.tau == pytest.approx(0.4 / capacity(1.0), rel=1e-12)
    private = tau_degraded(inst((2, 1, 1), P, 0.4, 0.0))
    assert private.tau == pytest.approx(0.4 / capacity(4.0), rel=1e-12)
    assert private.params["gamma"] == 1.0
    weaker = tau_degraded(inst((1, 2, 1), P, 0.6, 0.2))
    assert weaker.tau == pytest.approx(0.6 / capacity(1.0), rel=1e-12)


def test_degraded_two_layer_matches_scan():
    got = tau_degraded(inst((2, 1, 90), 1.0, 0.9, 0.3))
    assert got.tau == pytest.approx(oracles.tau_degraded_scan(2, 1, 1.0, 0.9, 0.3), rel=1e-5)
    assert 0 < got.params["gamma"] < 1


def test_coop_example():
    r = tau_coop(inst((2, 1, 2), 1.0, 0.5, 0.5))
    assert r.tau1 == pytest.approx(0.430677, abs=1e-6)
    assert r.tau0 == pytest.approx((0.5 - 0.5 * 0.5 / capacity(4)) / capacity(5), rel=1e-12)
    # the published six-digit tau0 = 0.220235 carries a slip in its fifth digit
    assert r.tau0 == pytest.approx(0.220235, abs=2e-5)
    assert r.params["helper"] == 2


def test_coop_clamped_and_degenerate():
    # equal exclusive times: list decoding alone resolves node-3
    r = tau_coop(inst((2, 1, 1), 1.0, capacity(4), capacity(1)))
    assert r.tau0 == pytest.approx(0.0, abs=1e-15)
    # node-3 already knows S1, so it helps from the start by beamforming
    r = tau_coop(inst((2, 1, 1), 1.0, 0.7, 0.0))
    assert r.tau1 == 0.0
    assert r.tau == pytest.approx(0.7 / capacity(5))
    assert r.tau < 0.7 / capacity(4)


def test_coop_fb_alpha_one_is_coop():
    for h, H in [((2, 1, 2), (0.5, 0.5)), ((2, 1, 90), (0.9, 0.3)), ((1, 3, 0.5), (0.2, 1.1))]:
        i = inst(h, 1.0, *H)
        assert tau_coop_fb(i, 1.0).tau == pytest.approx(tau_coop(i).tau, abs=1e-12)


def test_coop_fb_dead_relay_link():
    i = inst((2, 1, 0), 1.0, 0.9, 0.3)
    r = tau_coop_fb_opt(i)
    assert r.params["alpha"] == 1.0
    assert r.tau == tau_coop(i).tau


def test_coop_fb_opt_beats_alpha_scan():
    i = inst((2, 1, 90), 1.0, 0.9, 0.3)
    best = tau_coop_fb_opt(i)
    assert best.tau <= tau_coop(i).tau
    scan = min(tau_coop_fb(i, a, SPEC).tau for a in np.linspace(0.01, 1, 100))
    assert best.tau <= scan + 1e-6


def test_feedback_helps_with_strong_inter_receiver_link():
    i = inst((1, 1, 30), 1.0, 0.8, 0.8)
    assert tau_coop_fb_opt(i).tau < tau_coop(i).tau - 0.01


def test_alpha_range_checked():
    with pytest.raises(ValueError):
        tau_coop_fb(inst((1, 1, 1), 1, 0.1, 0.1), 1.5)


def test_fig12_minimum_energies():
    e1 = min_energy_degraded(FIG12, 0.9, 0.3)
    e2 = min_energy_coop(FIG12, 0.9, 0.3)
    # independent evaluation of the closed forms with explicit log2(e)
    k = 2 / math.log2(math.e)
    assert e1 == pytest.approx(k * (0.9 / 4 + (1 - 1 / 4) * 0.3), rel=1e-12)
    assert e2 == pytest.approx(k * (0.9 / 4 + (4 * 0.3 - 0.9) / (8101 * 4)), rel=1e-12)
    assert e1 == pytest.approx(0.623832, abs=1e-3)
    assert e2 == pytest.approx(0.311929, abs=1e-3)
    assert min_energy_degraded(FIG12, 0, 0) == 0.0
    assert min_energy_coop(FIG12, 0, 0) == 0.0


def test_min_energy_precondition():
    with pytest.raises(ValueError):
        min_energy_coop(ChannelGains(1, 2, 1), 0.9, 0.3)
    with pytest.raises(ValueError):
        min_energy_degraded(ChannelGains(1, 0, 1), 0.1, 0.3)


def test_numeric_energy_approaches_closed_forms():
    P = 1e-5
    e1 = energy_at(tau_degraded, FIG12, 0.9, 0.3, P)
    e2 = energy_at(tau_coop, FIG12, 0.9, 0.3, P)
    assert e1 == pytest.approx(min_energy_degraded(FIG12, 0.9, 0.3), rel=0.01)
    assert e2 == pytest.approx(min_energy_coop(FIG12, 0.9, 0.3), rel=0.01)


def test_energy_nondecreasing_in_power():
    Ps = np.logspace(-5, 1, 25)
    for fn in (tau_degraded, tau_coop):
        E = [energy_at(fn, FIG12, 0.9, 0.3, P) for P in Ps]
        assert np.all(np.diff(E) >= -1e-12)


@given(amp, amp, ent, ent, st.floats(1e-3, 100))
def test_degraded_never_worse_than_separate(h12, h13, H12, H13, P):
    i = inst((h12, h13, 1), P, H12, H13)
    assert tau_degraded(i).tau <= tau_separate(i).tau * (1 + 1e-12) + 1e-15


@given(amp, amp, ent, ent, st.floats(1e-2, 100))
def test_degraded_bisection_matches_scan(h12, h13, H12, H13, P):
    assume(min(H12, H13) > 0.01 and abs(H12 - H13) > 0.01)
    res = tau_degraded(inst((h12, h13, 1), P, H12, H13))
    want = oracles.tau_degraded_scan(h12, h13, P, H12, H13, n=20001)
    assert res.tau <= want * (1 + 1e-9)
    if "gamma" in res.params and h12 != h13:
        # the returned split is feasible at the returned tau
        ga, gb, Ha, Hb = (h12**2, h13**2, H12, H13) if H12 >= H13 else (h13**2, h12**2, H13, H12)
        if ga > gb:
            gm = res.params["gamma"]
            assert Ha - Hb <= res.tau * oracles.C(gm * ga * P) * (1 + 1e-9)
            assert Hb <= res.tau * oracles.C((1 - gm) * gb * P / (1 + gm * gb * P)) * (1 + 1e-9)


@given(amp, amp, amp, ent, ent, st.floats(1e-3, 100))
def test_coop_matches_oracle(h12, h13, h23, H12, H13, P):
    got = tau_coop(inst((h12, h13, h23), P, H12, H13)).tau
    assert got == pytest.approx(oracles.tau_coop(h12, h13, h23, P, H12, H13), rel=1e-12, abs=1e-15)


@settings(max_examples=30)
@given(amp, amp, amp, ent, ent, st.sampled_from([0.01, 1.0, 100.0]))
def test_feedback_optimum_never_worse(h12, h13, h23, H12, H13, P):
    i = inst((h12, h13, h23), P, H12, H13)
    assert tau_coop_fb_opt(i, SPEC).tau <= tau_coop(i).tau


@given(amp, amp, amp, ent, ent, st.floats(1e-3, 100), st.floats(0.01, 1), st.floats(0, math.pi / 2))
def test_feedback_tau_alpha_one_independent_of_split(h12, h13, h23, H12, H13, P, a, psi):
    t1, t0 = _coop_fb_tau(h12**2, h13**2, h23**2, H12, H13, P, 1.0, psi)
    c = tau_coop(inst((h12, h13, h23), P, H12, H13))
    assert float(t1 + t0) == pytest.approx(c.tau, rel=1e-12, abs=1e-15)


@given(amp, amp, amp, st.floats(0.01, 2), st.floats(0.01, 2))
def test_coop_minimum_energy_below_degraded(h12, h13, h23, H12, H13):
    # stronger receiver labelled 2, energy orientation enforced
    h12, h13 = max(h12, h13), min(h12, h13)
    assume(H12 / h12**2 <= H13 / h13**2)
    # equality only in the fully symmetric case
    assume(abs(h12 - h13) > 1e-6 or abs(H12 - H13) > 1e-6)
    g = ChannelGains(h12, h13, h23)
    assert min_energy_coop(g, H12, H13) < min_energy_degraded(g, H12, H13)
