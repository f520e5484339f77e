"""Deterministic grid-and-refine maximisation plus the relay-strategy optima.

The search is a coarse tensor grid followed by rounds of shrinking grids
centred on the incumbent. Ties go to the lowest flat grid index (numpy
``argmax`` semantics), so results never depend on evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from . import relay
from .capacity import LOG2E, ChannelGains, _cap, check_power
from .relay import HALF_PI


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 33
    rounds: int = 3
    shrink: float = 0.2
    tol: float = 1e-4

    def __post_init__(self):
        if self.resolution < 3:
            raise ValueError("grid resolution must be >= 3")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")


@dataclass
class OptResult:
    rate: float
    params: dict = field(default_factory=dict)
    evaluations: int = 0
    achieved_tolerance: float = 0.0


def _neighbour_delta(vals: np.ndarray, idx: tuple) -> float:
    best = vals[idx]
    delta = 0.0
    for ax in range(vals.ndim):
        for step in (-1, 1):
            j = idx[ax] + step
            if 0 <= j < vals.shape[ax]:
                nb = list(idx)
                nb[ax] = j
                v = vals[tuple(nb)]
                if np.isfinite(v):
                    delta = max(delta, abs(best - v))
    return float(delta)


def maximize(
    fn: Callable[..., np.ndarray],
    box: Mapping[str, tuple[float, float]],
    spec: GridSpec = GridSpec(),
    seeds: Sequence[Mapping[str, float]] = (),
) -> OptResult:
    """Maximise ``fn(**params)`` over a box.

    ``fn`` is called with broadcastable (sparse meshgrid) arrays and must
    return values of the broadcast shape. ``seeds`` are extra candidate
    points checked before the grid; a grid point replaces the incumbent
    only if strictly better.
    """
    if not box:
        raise ValueError("empty parameter box")
    names = list(box)
    if len(names) > 5:
        raise ValueError("at most 5 search dimensions are supported")
    lo = np.array([float(box[n][0]) for n in names])
    hi = np.array([float(box[n][1]) for n in names])
    if np.any(hi < lo) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError(f"empty or unbounded parameter box: {dict(box)}")

    best_val = -np.inf
    best_x = None
    evals = 0
    for seed in seeds:
        v = float(np.asarray(fn(**{n: float(seed[n]) for n in names})))
        evals += 1
        if v > best_val:
            best_val, best_x = v, np.array([float(seed[n]) for n in names])

    cur_lo, cur_hi = lo.copy(), hi.copy()
    tol_reached = np.inf
    n_rounds = spec.rounds + 1
    r = 0
    while True:
        axes = [
            np.linspace(a, b, spec.resolution) if b > a else np.array([a])
            for a, b in zip(cur_lo, cur_hi)
        ]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        shape = tuple(len(a) for a in axes)
        vals = np.broadcast_to(np.asarray(fn(**dict(zip(names, grids))), dtype=float), shape)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        evals += vals.size
        flat = int(np.argmax(vals))
        idx = np.unravel_index(flat, shape)
        if vals[idx] > best_val or best_x is None:
            best_val = float(vals[idx])
            best_x = np.array([axes[k][idx[k]] for k in range(len(names))])
        tol_reached = _neighbour_delta(vals, idx)
        r += 1
        if r >= n_rounds and (tol_reached <= spec.tol or r >= 2 * n_rounds):
            break
        width = spec.shrink * (cur_hi - cur_lo)
        cur_lo = np.clip(best_x - width / 2, lo, hi)
        cur_hi = np.clip(cur_lo + width, lo, hi)
        cur_lo = np.maximum(lo, cur_hi - width)

    return OptResult(
        rate=best_val,
        params={n: float(v) for n, v in zip(names, best_x)},
        evaluations=evals,
        achieved_tolerance=tol_reached,
    )


def maximize_rows(fn, lo: float, hi: float, n_rows: int, spec: GridSpec = GridSpec()):
    """Independent 1-D maximisations, one per row, done as a single batch.

    ``fn(x)`` receives ``x`` of shape ``(n_rows, k)`` and returns the same shape.
    Returns ``(argmax, max)`` arrays of length ``n_rows``.
    """
    cur_lo = np.full(n_rows, float(lo))
    cur_hi = np.full(n_rows, float(hi))
    best_x = np.full(n_rows, float(lo))
    best_v = np.full(n_rows, -np.inf)
    u = np.linspace(0.0, 1.0, spec.resolution)
    rows = np.arange(n_rows)
    for _ in range(spec.rounds + 1):
        x = cur_lo[:, None] + (cur_hi - cur_lo)[:, None] * u[None, :]
        v = np.asarray(fn(x), dtype=float)
        v = np.where(np.isnan(v), -np.inf, v)
        k = np.argmax(v, axis=1)
        vk = v[rows, k]
        better = vk > best_v
        best_v = np.where(better, vk, best_v)
        best_x = np.where(better, x[rows, k], best_x)
        width = spec.shrink * (cur_hi - cur_lo)
        cur_lo = np.clip(best_x - width / 2, lo, hi)
        cur_hi = np.clip(cur_lo + width, lo, hi)
        cur_lo = np.maximum(lo, cur_hi - width)
    return best_x, best_v


def maximize_batch(fn, box: Mapping[str, tuple[float, float]], n_rows: int, spec: GridSpec = GridSpec()):
    """Independent grid-and-refine maximisations over a small box, one per row.

    ``fn(**params)`` receives arrays of shape ``(n_rows, k)`` (one column per
    grid point) and returns the same shape. Returns ``(params, max)`` where
    ``params`` maps each name to a length-``n_rows`` array.
    """
    names = list(box)
    lo = np.array([float(box[n][0]) for n in names])
    hi = np.array([float(box[n][1]) for n in names])
    d = len(names)
    u = np.linspace(0.0, 1.0, spec.resolution)
    mesh = np.stack([m.reshape(-1) for m in np.meshgrid(*([u] * d), indexing="ij")])  # (d, k)
    cur_lo = np.tile(lo, (n_rows, 1))
    cur_hi = np.tile(hi, (n_rows, 1))
    best_x = np.tile(lo, (n_rows, 1))
    best_v = np.full(n_rows, -np.inf)
    rows = np.arange(n_rows)
    for _ in range(spec.rounds + 1):
        pts = cur_lo[:, :, None] + (cur_hi - cur_lo)[:, :, None] * mesh[None, :, :]
        v = np.asarray(fn(**{n: pts[:, i, :] for i, n in enumerate(names)}), dtype=float)
        v = np.where(np.isnan(v), -np.inf, v)
        k = np.argmax(v, axis=1)
        vk = v[rows, k]
        better = vk > best_v
        best_v = np.where(better, vk, best_v)
        best_x = np.where(better[:, None], pts[rows, :, k], best_x)
        width = spec.shrink * (cur_hi - cur_lo)
        cur_lo = np.clip(best_x - width / 2, lo, hi)
        cur_hi = np.clip(cur_lo + width, lo, hi)
        cur_lo = np.maximum(lo, cur_hi - width)
    return {n: best_x[:, i] for i, n in enumerate(names)}, best_v


# ---------------------------------------------------------------------------
# line crossing


def line_crossing(b1_at0, b1_at1, b2_at0, b2_at1):
    """Vectorised ``argmax_t min(branch1(t), branch2(t))`` for two affine branches.

    Returns ``(t_star, value)``. Ties prefer ``t = 1``, then the crossing.
    """
    b1_at0, b1_at1, b2_at0, b2_at1 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (b1_at0, b1_at1, b2_at0, b2_at1))
    )
    s1 = b1_at1 - b1_at0
    s2 = b2_at1 - b2_at0
    best = np.minimum(b1_at1, b2_at1)
    t = np.ones_like(best)

    d = s1 - s2
    with np.errstate(divide="ignore", invalid="ignore"):
        tc = np.where(d != 0, (b2_at0 - b1_at0) / np.where(d != 0, d, 1.0), -1.0)
    inside = (tc > 0) & (tc < 1)
    tc = np.where(inside, tc, 0.5)
    vc = np.minimum(b1_at0 + s1 * tc, b2_at0 + s2 * tc)
    take = inside & (vc > best)
    best = np.where(take, vc, best)
    t = np.where(take, tc, t)

    v0 = np.minimum(b1_at0, b2_at0)
    take = v0 > best
    best = np.where(take, v0, best)
    t = np.where(take, 0.0, t)
    if best.ndim == 0:
        return float(t), float(best)
    return t, best


def intersect_t(b1_at0, b1_at1, b2_at0, b2_at1) -> float:
    """Optimal time share for the min of two affine-in-t rate branches."""
    vals = [float(v) for v in (b1_at0, b1_at1, b2_at0, b2_at1)]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("branch endpoints must be finite")
    return line_crossing(*vals)[0]


# ---------------------------------------------------------------------------
# relay-strategy optima


_R_THETA = {"r12": (0.0, 1.0), "theta2": (0.0, HALF_PI)}


def optimize_relay_off(g: ChannelGains, P: float) -> OptResult:
    check_power(P)
    return OptResult(rate=float(_cap(g.g13 * P)), params={}, evaluations=1)


def optimize_odf(g: ChannelGains, P: float) -> OptResult:
    check_power(P)
    t, v = line_crossing(0.0, _cap(g.g12 * P), _cap(g.g23 * P), _cap(g.g13 * P))
    rate = relay.rate_odf(g, P, t)
    return OptResult(rate=rate, params={"t": t}, evaluations=1)


def optimize_df(g: ChannelGains, P: float, spec: GridSpec = GridSpec()) -> OptResult:
    """DF optimum; ``t`` is eliminated analytically at every ``(r12, theta2)``."""
    check_power(P)

    def value(r12, theta2):
        return line_crossing(*relay.df_endpoints(g, P, r12, theta2))[1]

    res = maximize(value, _R_THETA, spec, seeds=[{"r12": 0.0, "theta2": 0.0}])
    r12, theta2 = res.params["r12"], res.params["theta2"]
    t, _ = line_crossing(*relay.df_endpoints(g, P, r12, theta2))
    params = {"t": t, "r12": r12, "theta2": theta2}
    return OptResult(relay.rate_df(g, P, **params), params, res.evaluations, res.achieved_tolerance)


def optimize_cf(g: ChannelGains, P: float, spec: GridSpec = GridSpec()) -> OptResult:
    check_power(P)

    def value(t, theta2):
        return relay._rate_cf(g, P, t, theta2)

    res = maximize(
        value,
        {"t": (0.0, 1.0), "theta2": (0.0, HALF_PI)},
        spec,
        seeds=[{"t": 0.0, "theta2": 0.0}, {"t": 1.0, "theta2": 0.0}],
    )
    params = dict(res.params)
    return OptResult(relay.rate_cf(g, P, **params), params, res.evaluations, res.achieved_tolerance)


def best_feedback_split(g: ChannelGains, P: float, alpha, spec: GridSpec = GridSpec()):
    """For each ``alpha``, the m3 split maximising the relay's listening rate.

    The rate's first branch grows with this quantity and the second branch
    does not depend on ``psi3``, so the split optimises independently.
    """
    a = np.asarray(alpha, dtype=float)
    flat = a.reshape(-1)
    psi, val = maximize_rows(
        lambda x: relay.fb_listen_rate(g, P, flat[:, None], x), 0.0, HALF_PI, flat.size, spec
    )
    return psi.reshape(a.shape), val.reshape(a.shape)


def optimize_fb(
    g: ChannelGains, P: float, spec: GridSpec = GridSpec(), df: OptResult | None = None
) -> OptResult:
    """Feedback optimum, seeded with the DF optimum (the ``alpha = 1`` slice)."""
    check_power(P)
    if df is None:
        df = optimize_df(g, P, spec)
    c13 = _cap(g.g13 * P)

    def value(alpha, r12, theta2):
        _, listen = best_feedback_split(g, P, alpha, spec)
        d1, d2 = relay.m2_terms(g, P, r12, theta2)
        return line_crossing(d1, listen, d2, alpha * c13)[1]

    seed = {"alpha": 1.0, "r12": df.params["r12"], "theta2": df.params["theta2"]}
    res = maximize(value, {"alpha": (0.0, 1.0), **_R_THETA}, spec, seeds=[seed])
    alpha, r12, theta2 = res.params["alpha"], res.params["r12"], res.params["theta2"]
    psi3, listen = best_feedback_split(g, P, np.array(alpha), spec)
    psi3 = float(psi3)
    d1, d2 = relay.m2_terms(g, P, r12, theta2)
    t, _ = line_crossing(d1, float(listen), d2, alpha * c13)
    params = {"alpha": alpha, "t": t, "r12": r12, "theta2": theta2, "psi3": psi3}
    return OptResult(relay.rate_fb(g, P, **params), params, res.evaluations, res.achieved_tolerance)


STRATEGIES = ("OFF", "ODF", "DF", "CF", "FB")


def optimize_all(g: ChannelGains, P: float, spec: GridSpec = GridSpec()) -> dict[str, OptResult]:
    """Optimised rate of every relay strategy at one operating point."""
    df = optimize_df(g, P, spec)
    return {
        "OFF": optimize_relay_off(g, P),
        "ODF": optimize_odf(g, P),
        "DF": df,
        "CF": optimize_cf(g, P, spec),
        "FB": optimize_fb(g, P, spec, df=df),
    }


# ---------------------------------------------------------------------------
# low- and high-power asymptotics


def slope_estimate(rate_of_power: Callable[[float], float], P0: float = 1e-4) -> float:
    """Low-power slope ``S`` in ``R ~ 0.5 * log2(e) * S * P``.

    The estimate at ``P0`` is compared with ``P0 / 10``; a disagreement above
    5 % means ``P0`` is not yet in the linear regime and triggers a warning.
    """
    s = 2.0 * rate_of_power(P0) / (P0 * LOG2E)
    s_small = 2.0 * rate_of_power(P0 / 10) / (P0 / 10 * LOG2E)
    if not (math.isfinite(s) and math.isfinite(s_small)):
        raise ValueError("non-finite rate in slope estimate")
    if abs(s - s_small) > 0.05 * max(abs(s_small), 1e-300):
        warnings.warn(f"slope estimate not converged: {s} at P0 vs {s_small} at P0/10")
    return s


def gain_estimate(rate_of_power: Callable[[float], float], P1: float = 1e6) -> float:
    """High-power offset ``G`` in ``R ~ 0.5 * log2(P) + 0.5 * G``."""
    g1 = 2.0 * rate_of_power(P1) - math.log2(P1)
    g2 = 2.0 * rate_of_power(10 * P1) - math.log2(10 * P1)
    if not (math.isfinite(g1) and math.isfinite(g2)):
        raise ValueError("non-finite rate in gain estimate")
    if abs(g1 - g2) > 0.05:
        warnings.warn(f"gain estimate not converged: {g1} at P1 vs {g2} at 10*P1")
    return g1


class SlopeBounds(NamedTuple):
    slope: float
    lower: float
    upper: float


_FINE = GridSpec(resolution=65, rounds=5, shrink=0.2, tol=1e-10)


def _f1_f2(g: ChannelGains, r12, theta):
    c, s = np.cos(theta), np.sin(theta)
    f1 = g.g13 * c * c + 2 * r12 * g.h13 * g.h23 * c * s + g.g23 * s * s
    f2 = (1 - r12 * r12) * g.g13 * c * c
    return f1, f2


def slope_df_closed(g: ChannelGains, spec: GridSpec = _FINE) -> SlopeBounds:
    """Low-power DF slope from its closed form, with its analytic sandwich."""
    a, b = g.g12, g.g13
    if a < b:
        raise ValueError("closed-form DF slope needs h12^2 >= h13^2")

    def ratio(r12, theta2):
        f1, f2 = _f1_f2(g, r12, theta2)
        den = f1 + a - f2 - b
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(den > 0, (f1 * a - f2 * b) / np.where(den > 0, den, 1.0), b)
        return np.maximum(val, b)

    s = maximize(ratio, _R_THETA, spec, seeds=[{"r12": 0.0, "theta2": 0.0}]).rate
    c = g.g23
    lower = (b + c) * a / (c + a) if c + a > 0 else b
    den = c + a - b
    upper = ((b + c) * a - b * b) / den if den > 0 else b
    return SlopeBounds(s, lower, upper)


def gain_df_closed(g: ChannelGains, spec: GridSpec = _FINE) -> float:
    """High-power DF offset ``G_DF`` from its closed form (bits)."""
    if g.g12 < g.g13:
        raise ValueError("closed-form DF gain needs h12^2 >= h13^2")
    if g.h13 <= 0:
        raise ValueError("closed-form DF gain needs h13 > 0")
    lb, ld = math.log2(g.g12), math.log2(g.g13)

    def value(r12, theta2):
        f1, f2 = _f1_f2(g, r12, theta2)
        with np.errstate(divide="ignore", invalid="ignore"):
            la, lc = np.log2(f1), np.log2(f2)
            den = la + lb - lc - ld
            ok = (f1 > f2) & (f2 > 0) & (lb > ld) & (den > 0)
            val = np.where(ok, (la * lb - lc * ld) / np.where(ok, den, 1.0), ld)
        return np.maximum(val, ld)

    return maximize(value, _R_THETA, spec, seeds=[{"r12": 0.0, "theta2": 0.0}]).rate


def sigma2_cf_infinite_power(g: ChannelGains, t, theta2):
    """Large-power limit of the CF compression noise."""
    x = (g.g23 / g.g13) * np.tan(theta2) ** 2
    return relay._compression_noise(g.g12 + g.g13, g.g13, x, t)


def gain_cf_closed(g: ChannelGains, spec: GridSpec = _FINE) -> float:
    """High-power CF offset ``G_CF`` from its closed form (bits)."""
    if g.h13 <= 0:
        raise ValueError("closed-form CF gain needs h13 > 0")

    def value(t, theta2):
        s = sigma2_cf_infinite_power(g, t, theta2)
        with np.errstate(divide="ignore", invalid="ignore"):
            first = np.where(t > 0, t * np.log2(g.g13 + g.g12 / (1.0 + s)), 0.0)
            second = np.where(t < 1, (1 - t) * np.log2(g.g13 * np.cos(theta2) ** 2), 0.0)
        return first + second

    return maximize(
        value,
        {"t": (0.0, 1.0), "theta2": (0.0, HALF_PI)},
        spec,
        seeds=[{"t": 1.0, "theta2": 0.0}],
    ).rate
