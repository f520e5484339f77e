"""Cooperation strategies for the three-node half-duplex Gaussian network."""

from .capacity import ChannelGains, capacity, cut_set_bounds, relay_off_rate
from .conference import (
    EnergyGrid,
    conference_energies,
    genie_tau,
    greedy_schedule,
    min_energy_conference,
    optimal_schedule,
    total_tau,
)
from .multicast import optimize_df_mc, optimize_greedy_mc, rate_noncoop_mc
from .optimize import GridSpec, OptResult, maximize, optimize_all
from .sideinfo import (
    SideInfoInstance,
    TauResult,
    min_energy_coop,
    min_energy_degraded,
    tau_coop,
    tau_coop_fb,
    tau_coop_fb_opt,
    tau_degraded,
    tau_separate,
)
from .sources import EntropyBundle, JointPmf, bundle, cond_entropy, random_pmf

__all__ = [
    "ChannelGains",
    "EnergyGrid",
    "EntropyBundle",
    "GridSpec",
    "JointPmf",
    "OptResult",
    "SideInfoInstance",
    "TauResult",
    "bundle",
    "capacity",
    "conference_energies",
    "cond_entropy",
    "cut_set_bounds",
    "genie_tau",
    "greedy_schedule",
    "maximize",
    "min_energy_conference",
    "min_energy_coop",
    "min_energy_degraded",
    "optimal_schedule",
    "optimize_all",
    "optimize_df_mc",
    "optimize_greedy_mc",
    "random_pmf",
    "rate_noncoop_mc",
    "relay_off_rate",
    "tau_coop",
    "tau_coop_fb",
    "tau_coop_fb_opt",
    "tau_degraded",
    "tau_separate",
    "total_tau",
]
