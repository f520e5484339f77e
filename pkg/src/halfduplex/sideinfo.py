"""Multicasting a correlated source to two receivers holding side information.

Node-1 holds ``S1``; receiver ``i`` in {2, 3} must recover it and still lacks
``H1i = H(S1 | Si)`` bits per source symbol. The figure of merit is ``tau``,
channel uses per source symbol (lower is better), and the transmit energy
``E = tau * P``.

The ``_*_tau`` kernels take scalar squared gains and entropies and broadcast
over an array of powers; the conference scheduler calls them directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import relay
from .capacity import LOG2E, ChannelGains, _cap, check_power
from .optimize import GridSpec, maximize_batch
from .relay import HALF_PI

_BISECT_STEPS = 60
_E_SCALE = 2.0 / LOG2E


@dataclass(frozen=True)
class SideInfoInstance:
    g: ChannelGains
    P: float
    H12: float
    H13: float

    def __post_init__(self):
        check_power(self.P)
        for name in ("H12", "H13"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class TauResult:
    """Channel uses per source symbol, split into the two transmission phases.

    ``tau1`` is the phase in which node-1 transmits alone and ``tau0`` the
    cooperative phase (zero for single-phase schemes). ``tau = inf`` marks an
    infeasible instance (positive residual entropy over a dead link).
    """

    tau: float
    tau1: float
    tau0: float
    params: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.tau)


def _div(H, C):
    # H / C with 0/0 -> 0 and H/0 -> inf
    H = np.asarray(H, dtype=float)
    C = np.asarray(C, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = H / np.where(C > 0, C, 1.0)
    return np.where(H <= 0, 0.0, np.where(C > 0, q, np.inf))


# ---------------------------------------------------------------------------
# kernels


def _separate_tau(g12, g13, H12, H13, P):
    return _div(max(H12, H13), _cap(min(g12, g13) * P))


def _degraded_tau(g12, g13, H12, H13, P):
    """Nested-binning superposition; returns ``(tau, gamma)``.

    Broadcasts over all arguments. ``gamma`` is the power fraction of the
    private layer decoded only by the receiver with more residual entropy.
    """
    g12, g13, H12, H13, P = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (g12, g13, H12, H13, P)))
    swap = H12 < H13
    ga, gb = np.where(swap, g13, g12), np.where(swap, g12, g13)
    Ha, Hb = np.where(swap, H13, H12), np.where(swap, H12, H13)
    # now receiver "a" needs at least as much as receiver "b"
    one_layer_a = (Hb == 0) | (ga <= gb)
    one_layer_b = ~one_layer_a & (Ha == Hb)
    two_layer = ~(one_layer_a | one_layer_b)

    def top(gamma):
        return _div(Ha - Hb, _cap(gamma * ga * P))

    def bottom(gamma):
        return _div(Hb, _cap((1.0 - gamma) * gb * P / (1.0 + gamma * gb * P)))

    gamma = np.where(Hb == 0, 1.0, 0.0)
    tau = np.where(one_layer_a, _div(Ha, _cap(ga * P)), _div(Hb, _cap(gb * P)))
    if np.any(two_layer):
        # top decreases and bottom increases in gamma; bisect for the crossing
        lo = np.zeros(P.shape)
        hi = np.ones(P.shape)
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            up = top(mid) > bottom(mid)
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        # the crossing lies in [lo, hi]; keep whichever end is better (hi can sit on a dead layer)
        v_lo = np.maximum(top(lo), bottom(lo))
        v_hi = np.maximum(top(hi), bottom(hi))
        use_lo = v_lo < v_hi
        tau = np.where(two_layer, np.where(use_lo, v_lo, v_hi), tau)
        gamma = np.where(two_layer, np.where(use_lo, lo, hi), gamma)
    return tau, gamma


def _orient_by_exclusive(g12, g13, H12, H13, P):
    """``True`` where receiver 3 would finish first on its own and must be relabelled."""
    t2 = _div(H12, _cap(g12 * P))
    t3 = _div(H13, _cap(g13 * P))
    return t2 > t3


def _oriented(g12, g13, H12, H13, P):
    # relabel elementwise so receiver 2 is the one with the smaller exclusive tau
    swap = _orient_by_exclusive(g12, g13, H12, H13, P)
    return (
        np.where(swap, g13, g12),
        np.where(swap, g12, g13),
        np.where(swap, H13, H12),
        np.where(swap, H12, H13),
        swap,
    )


def _coop_tau_oriented(g12, g13, g23, H12, H13, P):
    c12 = _cap(g12 * P)
    c13 = _cap(g13 * P)
    cbf = _cap((g13 + g23) * P)
    tau1 = _div(H12, c12)
    with np.errstate(invalid="ignore"):
        known = np.where((H12 > 0) & (c12 > 0), np.minimum(c13, c12) * _div(H12, c12), 0.0)
    tau0 = _div(np.maximum(0.0, H13 - known), cbf)
    return tau1, tau0


def _coop_tau(g12, g13, g23, H12, H13, P):
    """DF-style cooperation: the stronger receiver decodes, then helps. Returns ``(tau1, tau0)``."""
    P = np.asarray(P, dtype=float)
    g12, g13, H12, H13, _ = _oriented(g12, g13, H12, H13, P)
    return _coop_tau_oriented(g12, g13, g23, H12, H13, P)


def _coop_fb_tau_oriented(g12, g13, g23, H12, H13, P, alpha, psi3):
    # node-3 compresses its observation for node-2 (the receiver that decodes first);
    # same Wyner-Ziv form as the relay feedback phase with node-3 as helper
    P1, P3 = relay.split_power(P, psi3)
    x = g23 * P3 / (g12 * P1 + 1.0)
    s = relay._compression_noise((g12 + g13) * P + 1.0, g12 * P + 1.0, x, alpha)
    rate = alpha * _cap((g13 / (1.0 + s) + g12) * P) + (1.0 - alpha) * _cap(g12 * P1)
    i1 = _cap(g13 * P)
    i2 = _cap((g12 + g13 / (1.0 + s)) * P)
    cbf = _cap((g13 + g23) * P)
    tau1 = _div(H12, rate)
    with np.errstate(invalid="ignore"):
        known = np.where((H12 > 0) & (rate > 0), alpha * np.minimum(i1, i2) * _div(H12, rate), 0.0)
    tau0 = _div(np.maximum(0.0, H13 - known), cbf)
    return tau1, tau0


def _coop_fb_tau(g12, g13, g23, H12, H13, P, alpha, psi3):
    """Cooperation where the weaker receiver first feeds back a compressed observation."""
    P = np.asarray(P, dtype=float)
    g12, g13, H12, H13, _ = _oriented(g12, g13, H12, H13, P)
    return _coop_fb_tau_oriented(g12, g13, g23, H12, H13, P, alpha, psi3)


def _coop_fb_opt_tau(g12, g13, g23, H12, H13, P, spec, alpha=None):
    """Best feedback cooperation, one independent search per row.

    Gains, entropies and powers broadcast to a common 1-D row shape, so a
    single call can cover many powers and many instances. ``alpha`` is fixed
    when given, else searched. Returns ``(tau1, tau0, alpha, psi3)`` arrays.
    The plain cooperative scheme is the ``alpha = 1`` member of the family
    and is always included, so the result never exceeds :func:`_coop_tau`.
    """
    g12, g13, g23, H12, H13, P = (
        np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(g12, g13, g23, H12, H13, P)
    )
    n = P.size
    g12, g13, H12, H13, _ = _oriented(g12, g13, H12, H13, P)
    cols = [v[:, None] for v in (g12, g13, g23, H12, H13, P)]
    box = {"psi3": (0.0, HALF_PI)}
    if alpha is None:
        box = {"alpha": (0.0, 1.0), **box}

    def neg_tau(psi3, alpha=alpha):
        a = alpha if isinstance(alpha, np.ndarray) else np.full_like(psi3, alpha)
        t1, t0 = _coop_fb_tau_oriented(*cols, a, psi3)
        return -(t1 + t0)

    params, _ = maximize_batch(neg_tau, box, n, spec)
    a = params["alpha"] if alpha is None else np.full(n, float(alpha))
    psi = params["psi3"]
    t1, t0 = _coop_fb_tau_oriented(g12, g13, g23, H12, H13, P, a, psi)
    if alpha is None or alpha == 1.0:
        c1, c0 = _coop_tau_oriented(g12, g13, g23, H12, H13, P)
        seed = (c1 + c0) <= (t1 + t0)
        t1 = np.where(seed, c1, t1)
        t0 = np.where(seed, c0, t0)
        a = np.where(seed, 1.0, a)
        psi = np.where(seed, 0.0, psi)
    return t1, t0, a, psi


# ---------------------------------------------------------------------------
# public API


def _gains(inst: SideInfoInstance):
    g = inst.g
    return g.g12, g.g13, g.g23, inst.H12, inst.H13


def tau_separate(inst: SideInfoInstance) -> TauResult:
    """Separate source and channel coding: the worse receiver sets the pace."""
    g12, g13, _, H12, H13 = _gains(inst)
    tau = float(_separate_tau(g12, g13, H12, H13, inst.P))
    return TauResult(tau, tau, 0.0)


def tau_degraded(inst: SideInfoInstance) -> TauResult:
    """Receivers never cooperate; nested binning over a degraded broadcast channel."""
    g12, g13, _, H12, H13 = _gains(inst)
    tau, gamma = _degraded_tau(g12, g13, H12, H13, inst.P)
    tau = float(tau)
    return TauResult(tau, tau, 0.0, {"gamma": float(gamma)})


def tau_coop(inst: SideInfoInstance) -> TauResult:
    """The receiver that would finish first decodes, then beamforms with node-1."""
    g12, g13, g23, H12, H13 = _gains(inst)
    t1, t0 = _coop_tau(g12, g13, g23, H12, H13, inst.P)
    swapped = bool(_orient_by_exclusive(g12, g13, H12, H13, inst.P))
    return TauResult(float(t1 + t0), float(t1), float(t0), {"helper": 3 if swapped else 2})


def tau_coop_fb(inst: SideInfoInstance, alpha: float, spec: GridSpec = GridSpec()) -> TauResult:
    """Feedback cooperation at a fixed listening fraction; the power split is optimised."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    g12, g13, g23, H12, H13 = _gains(inst)
    t1, t0, a, psi = _coop_fb_opt_tau(g12, g13, g23, H12, H13, inst.P, spec, alpha=float(alpha))
    return TauResult(float(t1[0] + t0[0]), float(t1[0]), float(t0[0]), {"alpha": float(a[0]), "psi3": float(psi[0])})


def tau_coop_fb_opt(inst: SideInfoInstance, spec: GridSpec = GridSpec()) -> TauResult:
    """Feedback cooperation optimised over the listening fraction and power split."""
    g12, g13, g23, H12, H13 = _gains(inst)
    t1, t0, a, psi = _coop_fb_opt_tau(g12, g13, g23, H12, H13, inst.P, spec)
    return TauResult(float(t1[0] + t0[0]), float(t1[0]), float(t0[0]), {"alpha": float(a[0]), "psi3": float(psi[0])})


def energy_at(tau_fn, g: ChannelGains, H12: float, H13: float, P: float) -> float:
    """Energy per source symbol ``tau * P`` of a scheme at power ``P``."""
    return tau_fn(SideInfoInstance(g, P, H12, H13)).tau * P


def _check_low_power_orientation(g: ChannelGains, H12: float, H13: float):
    for name, v in (("H12", H12), ("H13", H13)):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
    if g.g12 <= 0 or g.g13 <= 0:
        raise ValueError("minimum energy needs nonzero source links")
    if H12 / g.g12 > H13 / g.g13:
        raise ValueError("label the receivers so that H12/h12^2 <= H13/h13^2")


def min_energy_degraded(g: ChannelGains, H12: float, H13: float) -> float:
    """Minimum energy per source symbol without cooperation (attained as ``P -> 0``)."""
    _check_low_power_orientation(g, H12, H13)
    if H12 >= H13:
        return _E_SCALE * (H12 / g.g12 + max(1.0 / g.g13 - 1.0 / g.g12, 0.0) * H13)
    return _E_SCALE * (H13 / g.g13 + max(1.0 / g.g12 - 1.0 / g.g13, 0.0) * H12)


def min_energy_coop(g: ChannelGains, H12: float, H13: float) -> float:
    """Minimum energy per source symbol with the stronger receiver helping."""
    _check_low_power_orientation(g, H12, H13)
    rest = (g.g12 * H13 - min(g.g13, g.g12) * H12) / ((g.g13 + g.g23) * g.g12)
    return _E_SCALE * (H12 / g.g12 + rest)
