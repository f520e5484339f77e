"""Multicast from node-1 to nodes 2 and 3: non-cooperative, DF and greedy.

The formulas assume node-2 is the receiver with the stronger link. Public
functions relabel the receivers when ``h12 < h13``; the multicast rate is
symmetric in the receivers, so only reported parameters refer to the
oriented labelling.
"""

from __future__ import annotations

import numpy as np

from . import relay
from .capacity import ChannelGains, _cap, capacity, check_power
from .optimize import GridSpec, OptResult, best_feedback_split, line_crossing, maximize
from .relay import _check_angle, _check_unit, _out


def _oriented(g: ChannelGains) -> ChannelGains:
    return g if g.g12 >= g.g13 else g.swap_receivers()


def rate_noncoop_mc(g: ChannelGains, P) -> float:
    """Both receivers listen all the time; the weaker link sets the rate."""
    check_power(P)
    return capacity(min(g.g12, g.g13) * P)


def sigma4_mc(g: ChannelGains, P, alpha, psi3):
    """Compression noise of node-3's message to node-2 (``inf`` at ``alpha = 1``)."""
    check_power(P)
    if np.any(np.asarray(alpha) <= 0):
        raise ValueError("sigma4_mc needs alpha in (0, 1]")
    _check_unit("alpha", alpha)
    _check_angle("psi3", psi3)
    return _out(relay._sigma3(g, P, alpha, psi3))


def _rate_greedy(g, P, alpha, t, psi3):
    b1 = t * relay.fb_listen_rate(g, P, alpha, psi3)
    b2 = alpha * t * _cap(g.g13 * P) + (1.0 - t) * _cap((g.g13 + g.g23) * P)
    return np.minimum(b1, b2)


def rate_greedy_mc(g: ChannelGains, P, alpha, t, psi3):
    """Greedy cooperative multicast rate at fixed ``(alpha, t, psi3)``."""
    check_power(P)
    _check_unit("alpha", alpha)
    _check_unit("t", t)
    _check_angle("psi3", psi3)
    s4 = relay._sigma3(g, P, alpha, psi3)
    P1, _ = relay.split_power(P, psi3)
    b1 = alpha * t * _cap((g.g13 / (1.0 + s4) + g.g12) * P) + (1.0 - alpha) * t * _cap(g.g12 * P1)
    b2 = alpha * t * _cap(g.g13 * P) + (1.0 - t) * _cap((g.g13 + g.g23) * P)
    return _out(np.minimum(b1, b2))


def rate_df_mc(g: ChannelGains, P, t):
    """DF multicast (greedy with ``alpha = 1``)."""
    check_power(P)
    _check_unit("t", t)
    b1 = t * _cap(g.g12 * P)
    b2 = t * _cap(g.g13 * P) + (1.0 - t) * _cap((g.g13 + g.g23) * P)
    return _out(np.minimum(b1, b2))


def df_mc_optimal(g: ChannelGains, P: float) -> tuple[float, float]:
    """Closed-form optimal time share and rate of DF multicast."""
    check_power(P)
    o = _oriented(g)
    c12, c13 = capacity(o.g12 * P), capacity(o.g13 * P)
    cbf = capacity((o.g13 + o.g23) * P)
    den = cbf + (c12 - c13)
    if den <= 0:
        return 1.0, c12
    t = min(cbf / den, 1.0)
    return t, t * c12


def df_mc_gap(g: ChannelGains, P: float) -> float:
    """Closed-form gain of DF multicast over non-cooperative multicast."""
    o = _oriented(g)
    t, _ = df_mc_optimal(o, P)
    return (1.0 - t) * (capacity((o.g13 + o.g23) * P) - capacity(o.g13 * P))


def optimize_greedy_mc(g: ChannelGains, P: float, spec: GridSpec = GridSpec()) -> OptResult:
    """Greedy multicast optimum over ``(alpha, t, psi3)``.

    ``t`` comes from the line crossing and ``psi3`` maximises node-2's
    listening rate for each ``alpha``; the search is then one-dimensional.
    """
    check_power(P)
    o = _oriented(g)
    c13 = _cap(o.g13 * P)
    cbf = _cap((o.g13 + o.g23) * P)

    def value(alpha):
        _, listen = best_feedback_split(o, P, alpha, spec)
        return line_crossing(0.0, listen, cbf, alpha * c13)[1]

    res = maximize(value, {"alpha": (0.0, 1.0)}, spec, seeds=[{"alpha": 1.0}])
    alpha = res.params["alpha"]
    psi3, listen = best_feedback_split(o, P, np.array(alpha), spec)
    t, _ = line_crossing(0.0, float(listen), cbf, alpha * c13)
    params = {"alpha": alpha, "t": t, "psi3": float(psi3)}
    rate = rate_greedy_mc(o, P, **params)
    return OptResult(rate, params, res.evaluations, res.achieved_tolerance)


def optimize_df_mc(g: ChannelGains, P: float) -> OptResult:
    t, _ = df_mc_optimal(g, P)
    return OptResult(rate_df_mc(_oriented(g), P, t), {"t": t}, 1)


def slope_greedy_mc(g: ChannelGains) -> float:
    """Low-power slope of the greedy multicast rate."""
    o = _oriented(g)
    den = o.g12 + o.g23
    if den == 0:
        return 0.0
    return o.g12 * (o.g23 + o.g13) / den
