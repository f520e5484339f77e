"""Pointwise achievable rates for the half-duplex relay channel.

Node-1 is the source, node-3 the destination and node-2 the relay. Every
evaluator here works at fixed parameters; the suprema live in
:mod:`halfduplex.optimize`. All functions broadcast over numpy arrays.

Power splits are parameterised by angles so the per-state total power
constraint holds by construction:

* state m2: ``P1 = P cos^2(theta2)``, ``P2 = P sin^2(theta2)``
* state m3: ``P1 = P cos^2(psi3)``,   ``P3 = P sin^2(psi3)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import ChannelGains, _cap, check_power

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class RelayParams:
    t: float = 0.0
    alpha: float = 1.0
    r12: float = 0.0
    theta2: float = 0.0
    psi3: float = 0.0

    def __post_init__(self):
        _check_unit("t", self.t)
        _check_unit("alpha", self.alpha)
        _check_unit("r12", self.r12)
        _check_angle("theta2", self.theta2)
        _check_angle("psi3", self.psi3)


def _check_unit(name, v):
    a = np.asarray(v, dtype=float)
    if np.any(np.isnan(a)) or np.any(a < 0) or np.any(a > 1):
        raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


def _check_angle(name, v):
    a = np.asarray(v, dtype=float)
    if np.any(np.isnan(a)) or np.any(a < 0) or np.any(a > HALF_PI + 1e-12):
        raise ValueError(f"{name} must lie in [0, pi/2], got {v!r}")


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def split_power(P, angle):
    """``(P cos^2, P sin^2)`` for a power-split angle."""
    c = np.cos(angle)
    s = np.sin(angle)
    return P * c * c, P * s * s


def _wz_bracket(x, expo):
    # (1 + x)**expo - 1, accurate for small x; x == 0 gives 0 even when expo is inf
    with np.errstate(invalid="ignore", over="ignore"):
        val = np.expm1(expo * np.log1p(x))
    return np.where(x == 0, 0.0, val)


def _compression_noise(num, den_scale, x, frac):
    """``num / (den_scale * ((1+x)**((1-frac)/frac) - 1))`` with inf where it degenerates."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        frac = np.asarray(frac, dtype=float)
        expo = (1.0 - frac) / frac
        den = den_scale * _wz_bracket(x, expo)
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return out


# ---------------------------------------------------------------------------
# kernels (unchecked)


def _sigma2(g: ChannelGains, P, t, theta2):
    P1, P2 = split_power(P, theta2)
    x = g.g23 * P2 / (g.g13 * P1 + 1.0)
    return _compression_noise((g.g12 + g.g13) * P + 1.0, g.g13 * P + 1.0, x, t)


def _sigma3(g: ChannelGains, P, alpha, psi3):
    P1, P3 = split_power(P, psi3)
    x = g.g23 * P3 / (g.g12 * P1 + 1.0)
    return _compression_noise((g.g12 + g.g13) * P + 1.0, g.g12 * P + 1.0, x, alpha)


def m2_terms(g: ChannelGains, P, r12, theta2):
    """Relay-assisted state capacities ``(D1, D2)``.

    ``D1`` is the residual rate the source can push past the relay,
    ``D2`` the coherent source+relay rate seen at the destination.
    """
    P1, P2 = split_power(P, theta2)
    d1 = _cap((1.0 - r12 * r12) * g.g13 * P1)
    d2 = _cap(g.g13 * P1 + 2.0 * r12 * g.h13 * g.h23 * np.sqrt(P1 * P2) + g.g23 * P2)
    return d1, d2


def df_endpoints(g: ChannelGains, P, r12, theta2):
    """Endpoints ``(b1(0), b1(1), b2(0), b2(1))`` of the two affine-in-t DF branches."""
    d1, d2 = m2_terms(g, P, r12, theta2)
    return d1, _cap(g.g12 * P), d2, _cap(g.g13 * P)


def fb_listen_rate(g: ChannelGains, P, alpha, psi3):
    """Relay-side rate per unit of listening time for the feedback scheme."""
    s3 = _sigma3(g, P, alpha, psi3)
    P1, _ = split_power(P, psi3)
    return alpha * _cap((g.g13 / (1.0 + s3) + g.g12) * P) + (1.0 - alpha) * _cap(g.g12 * P1)


def fb_endpoints(g: ChannelGains, P, alpha, r12, theta2, psi3):
    d1, d2 = m2_terms(g, P, r12, theta2)
    return d1, fb_listen_rate(g, P, alpha, psi3), d2, alpha * _cap(g.g13 * P)


def _rate_df(g, P, t, r12, theta2):
    d1, d2 = m2_terms(g, P, r12, theta2)
    b1 = t * _cap(g.g12 * P) + (1.0 - t) * d1
    b2 = t * _cap(g.g13 * P) + (1.0 - t) * d2
    return np.minimum(b1, b2)


def _rate_cf(g, P, t, theta2):
    P1, _ = split_power(P, theta2)
    s2 = _sigma2(g, P, t, theta2)
    first = np.where(t > 0, t * _cap((g.g13 + g.g12 / (1.0 + s2)) * P), 0.0)
    return first + (1.0 - t) * _cap(g.g13 * P1)


def _rate_fb(g, P, alpha, t, r12, theta2, psi3):
    d1, d2 = m2_terms(g, P, r12, theta2)
    s3 = _sigma3(g, P, alpha, psi3)
    P1m3, _ = split_power(P, psi3)
    b1 = (
        alpha * t * _cap((g.g13 / (1.0 + s3) + g.g12) * P)
        + (1.0 - alpha) * t * _cap(g.g12 * P1m3)
        + (1.0 - t) * d1
    )
    b2 = alpha * t * _cap(g.g13 * P) + (1.0 - t) * d2
    return np.minimum(b1, b2)


# ---------------------------------------------------------------------------
# public evaluators


def rate_df(g: ChannelGains, P, t, r12, theta2):
    """Decode-and-forward rate at fixed time share, correlation and power split."""
    check_power(P)
    _check_unit("t", t)
    _check_unit("r12", r12)
    _check_angle("theta2", theta2)
    return _out(_rate_df(g, P, t, r12, theta2))


def sigma2_cf(g: ChannelGains, P, t, theta2):
    """Wyner-Ziv compression noise of the CF relay; ``inf`` when the relay link is useless."""
    check_power(P)
    if np.any(np.asarray(t) <= 0):
        raise ValueError("sigma2_cf is undefined at t = 0 (CF degenerates to direct transmission)")
    _check_unit("t", t)
    _check_angle("theta2", theta2)
    return _out(_sigma2(g, P, t, theta2))


def rate_cf(g: ChannelGains, P, t, theta2):
    """Compress-and-forward rate; endpoints ``t in {0, 1}`` take their limits."""
    check_power(P)
    _check_unit("t", t)
    _check_angle("theta2", theta2)
    return _out(_rate_cf(g, P, t, theta2))


def sigma3_fb(g: ChannelGains, P, alpha, psi3):
    """Compression noise of the destination-to-relay feedback (``inf`` at ``alpha = 1``)."""
    check_power(P)
    if np.any(np.asarray(alpha) <= 0):
        raise ValueError("sigma3_fb needs alpha in (0, 1]")
    _check_unit("alpha", alpha)
    _check_angle("psi3", psi3)
    return _out(_sigma3(g, P, alpha, psi3))


def rate_fb(g: ChannelGains, P, alpha, t, r12, theta2, psi3):
    """Feedback (CF then DF) rate. Reduces exactly to :func:`rate_df` at ``alpha = 1``."""
    check_power(P)
    _check_unit("alpha", alpha)
    _check_unit("t", t)
    _check_unit("r12", r12)
    _check_angle("theta2", theta2)
    _check_angle("psi3", psi3)
    return _out(_rate_fb(g, P, alpha, t, r12, theta2, psi3))


def rate_odf(g: ChannelGains, P, t):
    """Orthogonal DF: the source and relay never transmit together."""
    check_power(P)
    _check_unit("t", t)
    b1 = t * _cap(g.g12 * P)
    b2 = t * _cap(g.g13 * P) + (1.0 - t) * _cap(g.g23 * P)
    return _out(np.minimum(b1, b2))


def ub_fb(g: ChannelGains, P, alpha, t, r12, theta2, psi3):
    """Line-crossing upper bound on :func:`rate_fb`."""
    check_power(P)
    _check_unit("alpha", alpha)
    _check_unit("t", t)
    _check_unit("r12", r12)
    _check_angle("theta2", theta2)
    _check_angle("psi3", psi3)
    d1, d2 = m2_terms(g, P, r12, theta2)
    P1m3, P3m3 = split_power(P, psi3)
    b1 = (
        alpha * t * _cap(g.g12 * P)
        + (1.0 - alpha) * t * _cap(g.g12 * P1m3 + g.g23 * P3m3)
        + (1.0 - t) * d1
    )
    b2 = alpha * t * _cap(g.g13 * P) + (1.0 - t) * d2
    return _out(np.minimum(b1, b2))


def ub_cf(g: ChannelGains, P, t, theta2):
    """Line-crossing upper bound on :func:`rate_cf`."""
    check_power(P)
    _check_unit("t", t)
    _check_angle("theta2", theta2)
    P1, P2 = split_power(P, theta2)
    b1 = t * _cap(g.g13 * P) + (1.0 - t) * _cap(g.g13 * P1 + g.g23 * P2)
    b2 = t * _cap((g.g13 + g.g12) * P) + (1.0 - t) * _cap(g.g13 * P1)
    return _out(np.minimum(b1, b2))
