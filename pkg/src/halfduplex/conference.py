"""Three-node conference: every node multicasts its source to the other two.

A schedule is a permutation of the nodes. After node ``i`` multicasts, both
other nodes hold ``Si``; later stages condition on everything a receiver
holds. Stage costs come from :mod:`halfduplex.sideinfo` and add up.

Only 12 distinct stages exist (multicaster and the set of nodes that went
before it), so schedulers build a table of stage costs over an array of
powers once and combine it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .capacity import ChannelGains, _cap, check_power
from .optimize import GridSpec
from .sideinfo import _coop_fb_opt_tau, _degraded_tau, _div
from .sources import NODES, EntropyBundle

SCHEMES = ("coop", "degraded")
# per-stage search over (alpha, psi3); matches a 65-point grid to ~1e-7 relative
STAGE_SPEC = GridSpec(9, 4, 0.3)
ORDERS = tuple(itertools.permutations(NODES))


@dataclass(frozen=True)
class StageReport:
    multicaster: int
    receivers: tuple[int, int]
    residuals: tuple[float, float]
    scheme: str
    tau: float
    alpha: float | None = None


@dataclass(frozen=True)
class ScheduleReport:
    order: tuple[int, int, int]
    stages: tuple[StageReport, StageReport, StageReport]
    tau: float
    energy: float


def _check_scheme(scheme: str):
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def _check_order(order):
    if sorted(order) != list(NODES):
        raise ValueError(f"order must be a permutation of {NODES}, got {order!r}")


def _receivers(i: int) -> tuple[int, int]:
    j, k = (n for n in NODES if n != i)
    return j, k


def stage_gains(g: ChannelGains, i: int) -> ChannelGains:
    """Gains seen by multicaster ``i``, relabelled so it plays node-1."""
    j, k = _receivers(i)
    return ChannelGains(g.link(i, j), g.link(i, k), g.link(j, k))


def stage_residuals(bundle: EntropyBundle, i: int, before) -> tuple[float, float]:
    """``H(Si | holdings)`` for both receivers, given the nodes that multicast earlier."""
    before = set(before)
    return tuple(bundle.h(i, {r} | before) for r in _receivers(i))


def genie_tau(bundle: EntropyBundle, g: ChannelGains, P):
    """Lower bound on any conference scheme: the other two nodes act as one receiver."""
    check_power(P)
    P = np.asarray(P, dtype=float)
    out = np.zeros_like(P)
    for i in NODES:
        j, k = _receivers(i)
        need = bundle.triple[i] + bundle.joint_given[i]
        cap = _cap((g.link(i, j) ** 2 + g.link(i, k) ** 2) * P)
        out = np.maximum(out, _div(need, cap))
    return float(out) if out.ndim == 0 else out


def _stage_keys():
    for i in NODES:
        j, k = _receivers(i)
        for before in ((), (j,), (k,), (j, k)):
            yield i, before


class StageTable:
    """Costs of all 12 stages for one instance over an array of powers."""

    def __init__(self, bundle: EntropyBundle, g: ChannelGains, P, scheme: str, spec: GridSpec = STAGE_SPEC):
        _check_scheme(scheme)
        check_power(P)
        self.P = np.atleast_1d(np.asarray(P, dtype=float))
        self.scheme = scheme
        self.tau = {}
        self.alpha = {}
        keys = list(_stage_keys())
        n = self.P.size
        rows = []
        for i, before in keys:
            s = stage_gains(g, i)
            rows.append((s.g12, s.g13, s.g23, *stage_residuals(bundle, i, before)))
        g12, g13, g23, H2, H3 = np.repeat(np.array(rows, dtype=float), n, axis=0).T
        Pr = np.tile(self.P, len(keys))
        if scheme == "degraded":
            tau, _ = _degraded_tau(g12, g13, H2, H3, Pr)
            alpha = np.full(tau.shape, np.nan)
        else:
            # every coop stage at every power in one batched search
            t1, t0, alpha, _ = _coop_fb_opt_tau(g12, g13, g23, H2, H3, Pr, spec)
            tau = t1 + t0
        tau = tau.reshape(len(keys), n)
        alpha = alpha.reshape(len(keys), n)
        for m, (i, before) in enumerate(keys):
            self.tau[(i, frozenset(before))] = tau[m]
            self.alpha[(i, frozenset(before))] = alpha[m]

    def order_tau(self, order) -> np.ndarray:
        a, b, c = order
        return self.tau[(a, frozenset())] + self.tau[(b, frozenset({a}))] + self.tau[(c, frozenset({a, b}))]

    def optimal(self) -> tuple[np.ndarray, np.ndarray]:
        """Minimum total over the six orders and the index into :data:`ORDERS` (first wins ties)."""
        totals = np.stack([self.order_tau(o) for o in ORDERS])
        idx = np.argmin(totals, axis=0)
        return totals[idx, np.arange(totals.shape[1])], idx

    def greedy(self) -> tuple[np.ndarray, np.ndarray]:
        """Greedy total and the index of the chosen order, elementwise in ``P``."""
        n = self.P.size
        cols = np.arange(n)
        first_costs = np.stack([self.tau[(i, frozenset())] for i in NODES])
        first = np.argmin(first_costs, axis=0) + 1
        total = first_costs[first - 1, cols]
        second = np.zeros(n, dtype=int)
        second_cost = np.full(n, np.inf)
        for j in NODES:
            cost = np.full(n, np.inf)
            for a in NODES:
                if a != j:
                    cost = np.where(first == a, self.tau[(j, frozenset({a}))], cost)
            pick = (first != j) & (cost < second_cost)
            second = np.where(pick, j, second)
            second_cost = np.where(pick, cost, second_cost)
        third = 6 - first - second
        third_cost = np.zeros(n)
        for c in NODES:
            rest = frozenset(n_ for n_ in NODES if n_ != c)
            third_cost = np.where(third == c, self.tau[(c, rest)], third_cost)
        total = total + second_cost + third_cost
        idx = np.array([ORDERS.index((int(a), int(b), int(c))) for a, b, c in zip(first, second, third)])
        return total, idx


def stage_tau(
    i: int,
    holdings,
    bundle: EntropyBundle,
    g: ChannelGains,
    P: float,
    scheme: str = "coop",
    spec: GridSpec = STAGE_SPEC,
) -> StageReport:
    """Cost of node ``i`` multicasting given each node's current holdings.

    ``holdings`` maps node -> set of sources it holds (its own included).
    """
    _check_scheme(scheme)
    check_power(P)
    j, k = _receivers(i)
    res = (bundle.h(i, holdings[j]), bundle.h(i, holdings[k]))
    s = stage_gains(g, i)
    Parr = np.array([float(P)])
    if scheme == "degraded":
        tau, _ = _degraded_tau(s.g12, s.g13, res[0], res[1], Parr)
        alpha = None
    elif res == (0.0, 0.0):
        tau, alpha = np.zeros(1), 1.0
    else:
        t1, t0, a, _ = _coop_fb_opt_tau(s.g12, s.g13, s.g23, res[0], res[1], Parr, spec)
        tau, alpha = t1 + t0, float(a[0])
    return StageReport(i, (j, k), res, scheme, float(np.asarray(tau).reshape(-1)[0]), alpha)


def _initial_holdings():
    return {n: {n} for n in NODES}


def total_tau(order, bundle, g, P, scheme="coop", spec: GridSpec = STAGE_SPEC) -> ScheduleReport:
    """Run the three stages in ``order``, updating what every node holds."""
    _check_order(order)
    holdings = _initial_holdings()
    stages = []
    for i in order:
        stages.append(stage_tau(i, holdings, bundle, g, P, scheme, spec))
        for n in NODES:
            holdings[n].add(i)
    tau = sum(s.tau for s in stages)
    return ScheduleReport(tuple(order), tuple(stages), tau, tau * P)


def optimal_schedule(bundle, g, P, scheme="coop", spec: GridSpec = STAGE_SPEC) -> ScheduleReport:
    """Best of the six orders; the lexicographically first wins ties."""
    best = None
    for order in ORDERS:
        rep = total_tau(order, bundle, g, P, scheme, spec)
        if best is None or rep.tau < best.tau:
            best = rep
    return best


def greedy_schedule(bundle, g, P, scheme="coop", spec: GridSpec = STAGE_SPEC) -> ScheduleReport:
    """At each stage pick the remaining node with the cheapest stage (lowest index on ties)."""
    holdings = _initial_holdings()
    remaining = list(NODES)
    stages = []
    while remaining:
        reports = [stage_tau(i, holdings, bundle, g, P, scheme, spec) for i in remaining]
        pick = min(range(len(reports)), key=lambda n: (reports[n].tau, n))
        stages.append(reports[pick])
        i = remaining.pop(pick)
        for n in NODES:
            holdings[n].add(i)
    tau = sum(s.tau for s in stages)
    return ScheduleReport(tuple(s.multicaster for s in stages), tuple(stages), tau, tau * P)


@dataclass(frozen=True)
class EnergyGrid:
    """Log-spaced power grid for the minimum-energy search."""

    lo: float = 1e-6
    hi: float = 1e2
    per_decade: int = 60
    refine_points: int = 21
    refine_rounds: int = 2

    def __post_init__(self):
        if not (0 < self.lo < self.hi) or not math.isfinite(self.hi):
            raise ValueError("need 0 < lo < hi < inf")
        if self.per_decade < 1 or self.refine_points < 3 or self.refine_rounds < 0:
            raise ValueError("invalid grid density")

    def powers(self) -> np.ndarray:
        decades = math.log10(self.hi / self.lo)
        n = max(2, int(round(decades * self.per_decade)) + 1)
        return np.logspace(math.log10(self.lo), math.log10(self.hi), n)


MODES = ("optimal", "greedy", "genie")


def _total_over(P, bundle, g, scheme, mode, spec):
    if mode == "genie":
        return np.asarray(genie_tau(bundle, g, P), dtype=float)
    table = StageTable(bundle, g, P, scheme, spec)
    return (table.optimal() if mode == "optimal" else table.greedy())[0]


def min_energy_conference(
    bundle: EntropyBundle,
    g: ChannelGains,
    scheme: str = "coop",
    mode: str = "optimal",
    grid: EnergyGrid = EnergyGrid(),
    spec: GridSpec = STAGE_SPEC,
) -> tuple[float, float]:
    """Minimum of ``tau(P) * P`` over the power grid, refined around the best point.

    Returns ``(energy, P_star)``; ``(inf, nan)`` marks an infeasible instance.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    P = grid.powers()
    E = _total_over(P, bundle, g, scheme, mode, spec) * P
    k = int(np.argmin(E))
    best_E, best_P = float(E[k]), float(P[k])
    if not math.isfinite(best_E):
        return math.inf, math.nan
    lo = math.log10(P[max(k - 1, 0)])
    hi = math.log10(P[min(k + 1, P.size - 1)])
    for _ in range(grid.refine_rounds):
        Pr = np.logspace(lo, hi, grid.refine_points)
        Er = _total_over(Pr, bundle, g, scheme, mode, spec) * Pr
        j = int(np.argmin(Er))
        if Er[j] < best_E:
            best_E, best_P = float(Er[j]), float(Pr[j])
        step = (hi - lo) / (grid.refine_points - 1)
        lo = max(lo, math.log10(best_P) - step)
        hi = min(hi, math.log10(best_P) + step)
    return best_E, best_P


@dataclass(frozen=True)
class ConferenceEnergies:
    """Minimum energies of the four conference benchmarks for one instance."""

    genie: float
    opt_coop: float
    greedy_coop: float
    opt_degraded: float
    P_opt_coop: float
    P_greedy_coop: float


def conference_energies(
    bundle: EntropyBundle,
    g: ChannelGains,
    grid: EnergyGrid = EnergyGrid(),
    spec: GridSpec = STAGE_SPEC,
) -> ConferenceEnergies:
    """Genie, optimal/greedy cooperative and optimal degraded minimum energies.

    The cooperative schedulers share one stage table, and every power probed
    for either scheduler is probed for both, so ``opt_coop <= greedy_coop``
    holds exactly.
    """
    E_gen, _ = min_energy_conference(bundle, g, mode="genie", grid=grid, spec=spec)
    E_nc, _ = min_energy_conference(bundle, g, "degraded", "optimal", grid, spec)

    P = grid.powers()
    table = StageTable(bundle, g, P, "coop", spec)
    probes = [(P, table.optimal()[0] * P, table.greedy()[0] * P)]
    for which in (1, 2):
        E = probes[0][which]
        k = int(np.argmin(E))
        if not math.isfinite(E[k]):
            continue
        lo = math.log10(P[max(k - 1, 0)])
        hi = math.log10(P[min(k + 1, P.size - 1)])
        for _ in range(grid.refine_rounds):
            Pr = np.logspace(lo, hi, grid.refine_points)
            t = StageTable(bundle, g, Pr, "coop", spec)
            probes.append((Pr, t.optimal()[0] * Pr, t.greedy()[0] * Pr))
            Er = probes[-1][which]
            j = int(np.argmin(Er))
            step = (hi - lo) / (grid.refine_points - 1)
            lo = max(lo, math.log10(Pr[j]) - step)
            hi = min(hi, math.log10(Pr[j]) + step)
    allP = np.concatenate([p[0] for p in probes])
    Eo = np.concatenate([p[1] for p in probes])
    Eg = np.concatenate([p[2] for p in probes])
    ko, kg = int(np.argmin(Eo)), int(np.argmin(Eg))
    return ConferenceEnergies(
        float(E_gen), float(Eo[ko]), float(Eg[kg]), float(E_nc), float(allP[ko]), float(allP[kg])
    )
