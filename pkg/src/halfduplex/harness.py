"""Experiment drivers behind the command line: sweeps, region maps and Monte Carlo.

Every command is a pure function of its :class:`RunConfig` and returns a
:class:`CsvTable`; parallel paths assemble rows in input order so the bytes
written never depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import multicast, sideinfo
from .capacity import ChannelGains, capacity, cut_set_bounds, db_to_amplitude
from .conference import (
    ORDERS,
    STAGE_SPEC,
    EnergyGrid,
    StageTable,
    conference_energies,
    genie_tau,
)
from .optimize import GridSpec, optimize_all
from .sources import EntropyBundle, JointPmf, bundle, random_pmf

# default operating points of the reproduced figures; 200 is read as a power
# ratio, so the amplitude is its square root
RELAY_GAINS = (1.8, 1.0, math.sqrt(200.0))
MULTICAST_GAINS = (1.1, 1.0, 14.125)
SIDEINFO_GAINS = (2.0, 1.0, 90.0)
SIDEINFO_ENTROPIES = (0.9, 0.3)
TIE_MARGIN = 1e-4
# winners listed simplest first; the first strategy within the margin of the best wins
REGION_PRIORITY = ("OFF", "DF", "CF", "FB")
MC_GAIN_DB = 20.0
MC_GRID = EnergyGrid(per_decade=2, refine_points=5, refine_rounds=2)
HIST_EDGES_DB = tuple(range(0, 31, 1))


class ConfigError(ValueError):
    """Invalid run configuration (exit status 2)."""


class InfeasibleError(RuntimeError):
    """A single-shot query has no finite answer (exit status 3)."""


@dataclass(frozen=True)
class Range:
    """Log-spaced sweep ``lo:hi:steps``."""

    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not (0 < self.lo <= self.hi) or not math.isfinite(self.hi):
            raise ConfigError(f"range needs 0 < lo <= hi, got {self.lo}:{self.hi}")
        if self.steps < 1 or (self.steps == 1 and self.lo != self.hi):
            raise ConfigError("range needs at least 2 steps unless lo == hi")

    @classmethod
    def parse(cls, text: str) -> "Range":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"expected lo:hi:steps, got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"bad range {text!r}: {exc}") from None

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.logspace(math.log10(self.lo), math.log10(self.hi), self.steps)


@dataclass(frozen=True)
class RunConfig:
    command: str
    gains: tuple[float, float, float] | None = None
    db: bool = False
    power: float | None = None
    power_range: Range | None = None
    sweep: str = "P"
    gain_range: Range | None = None
    h12_range: Range | None = None
    h23_range: Range | None = None
    seed: int | None = None
    draws: int = 10_000
    grid: GridSpec | None = None
    per_decade: int | None = None
    out: str | None = None
    pmf: str | None = None
    entropies: tuple[float, ...] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.gains is not None:
            if len(self.gains) != 3:
                raise ConfigError("--gains needs three values h12,h13,h23")
            if not self.db and any(not math.isfinite(v) or v < 0 for v in self.gains):
                raise ConfigError("linear gains must be finite and >= 0")
        if self.power is not None and (not math.isfinite(self.power) or self.power < 0):
            raise ConfigError("--power must be finite and >= 0")
        if self.sweep not in ("P", "h12", "h13", "h23"):
            raise ConfigError("--sweep must be one of P, h12, h13, h23")
        if self.draws < 1:
            raise ConfigError("--draws must be >= 1")
        if self.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if self.per_decade is not None and self.per_decade < 1:
            raise ConfigError("--per-decade must be >= 1")
        if self.entropies is not None and any(not math.isfinite(v) or v < 0 for v in self.entropies):
            raise ConfigError("entropies must be finite and >= 0")

    def spec(self, default: GridSpec = GridSpec()) -> GridSpec:
        return self.grid if self.grid is not None else default

    def channel(self, default) -> ChannelGains:
        vals = self.gains if self.gains is not None else default
        if self.db and self.gains is not None:
            vals = tuple(db_to_amplitude(v) for v in vals)
        return ChannelGains(*vals)


# ---------------------------------------------------------------------------
# tables and plot scripts


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = format(v, ".9g")
    return "0" if s == "-0" else s


@dataclass
class CsvTable:
    header: tuple[str, ...]
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} fields, header has {len(self.header)}")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        k = self.header.index(name)
        return [r[k] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())


PLOT_KINDS = ("line", "region", "histogram")


def emit_plot_script(table: CsvTable, kind: str, csv_path: str, logx: bool = True) -> str:
    """A gnuplot script that draws ``csv_path`` (referenced relative to the script)."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}")
    name = Path(csv_path).name
    out = Path(csv_path).with_suffix(".png").name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        f"set output '{out}'",
        "set grid",
    ]
    if kind == "line":
        if logx:
            lines.append("set logscale x")
        lines.append(f"set xlabel '{table.header[0]}'")
        series = [f"'{name}' using 1:{k + 1} with linespoints" for k in range(1, len(table.header))]
        lines.append("plot " + ", \\\n     ".join(series))
    elif kind == "region":
        labels = {w: i for i, w in enumerate(REGION_PRIORITY)}
        lines += [
            "set logscale xy",
            f"set xlabel '{table.header[0]}'",
            f"set ylabel '{table.header[1]}'",
            "set palette maxcolors 4",
            "set palette defined (0 'gray', 1 'blue', 2 'green', 3 'red')",
            "set cbrange [-0.5:3.5]",
            "set cbtics (" + ", ".join(f"'{w}' {i}" for w, i in labels.items()) + ")",
            "code(s) = " + " : ".join(f"(s eq '{w}') ? {i}" for w, i in labels.items()) + " : -1",
            f"plot '{name}' using 1:2:(code(strcol(3))) with points pt 5 ps 1.5 palette notitle",
        ]
    else:
        lines += [
            "set style data histograms",
            "set style histogram clustered",
            "set style fill solid 0.6 border -1",
            "set xlabel 'dB above the genie bound'",
            "set xtics rotate by -45",
        ]
        series = [f"'{name}' using {k + 1}:xtic(1)" for k in range(2, len(table.header))]
        lines.append("plot " + ", \\\n     ".join(series))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sweeps


def _sweep_points(cfg: RunConfig, default_gains, default_power=1.0, default_range=Range(0.01, 100.0, 41)):
    """``(label, [(x, g, P), ...])`` for a power or gain sweep."""
    g = cfg.channel(default_gains)
    if cfg.sweep == "P":
        rng = cfg.power_range or (Range(cfg.power, cfg.power, 1) if cfg.power else default_range)
        return "P", [(P, g, P) for P in rng.values()]
    if cfg.gain_range is None:
        raise ConfigError(f"--sweep {cfg.sweep} needs --gain-range lo:hi:steps")
    P = cfg.power if cfg.power is not None else default_power
    pts = []
    for x in cfg.gain_range.values():
        h = dict(h12=g.h12, h13=g.h13, h23=g.h23)
        h[cfg.sweep] = db_to_amplitude(x) if cfg.db else float(x)
        pts.append((x, ChannelGains(**h), P))
    return cfg.sweep, pts


def _map(fn, items, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _relay_row(args):
    x, g, P, spec = args
    r = optimize_all(g, P, spec)
    bf, mr = cut_set_bounds(g, P)
    return (x, r["OFF"].rate, r["ODF"].rate, r["DF"].rate, r["CF"].rate, r["FB"].rate, bf, mr)


def cmd_relay_sweep(cfg: RunConfig) -> CsvTable:
    """Optimised relay-strategy rates along a power or gain sweep."""
    label, pts = _sweep_points(cfg, RELAY_GAINS)
    table = CsvTable((label, "R_off", "R_odf", "R_df", "R_cf", "R_fb", "beamforming", "multireceiver"))
    for row in _map(_relay_row, [(x, g, P, cfg.spec()) for x, g, P in pts], cfg.workers):
        table.add(*row)
    return table


def region_winner(rates: dict, margin: float = TIE_MARGIN) -> str:
    best = max(rates[k] for k in REGION_PRIORITY)
    for k in REGION_PRIORITY:
        if rates[k] >= best - margin:
            return k
    raise AssertionError("unreachable")


def _region_row(args):
    h12, h23, P, spec = args
    r = optimize_all(ChannelGains(h12, 1.0, h23), P, spec)
    rates = {k: r[k].rate for k in REGION_PRIORITY}
    return (h12, h23, region_winner(rates), rates["OFF"], rates["DF"], rates["CF"], rates["FB"])


def cmd_region_map(cfg: RunConfig) -> CsvTable:
    """Best strategy on an (h12, h23) log grid with h13 = 1."""
    P = cfg.power if cfg.power is not None else 1.0
    h12s = (cfg.h12_range or Range(0.1, 10.0, 21)).values()
    h23s = (cfg.h23_range or Range(0.1, 10.0, 21)).values()
    items = [(float(a), float(b), P, cfg.spec()) for a in h12s for b in h23s]
    table = CsvTable(("h12", "h23", "winner", "R_off", "R_df", "R_cf", "R_fb"))
    for row in _map(_region_row, items, cfg.workers):
        table.add(*row)
    return table


def _multicast_row(args):
    x, g, P, spec = args
    o = multicast._oriented(g)
    bf = capacity((o.g13 + o.g23) * P)
    mr = capacity((o.g12 + o.g13) * P)
    return (
        x,
        multicast.rate_noncoop_mc(g, P),
        multicast.optimize_df_mc(g, P).rate,
        multicast.optimize_greedy_mc(g, P, spec).rate,
        bf,
        mr,
    )


def cmd_multicast_sweep(cfg: RunConfig) -> CsvTable:
    """Multicast rates along a power or gain sweep."""
    label, pts = _sweep_points(cfg, MULTICAST_GAINS)
    table = CsvTable((label, "R_noncoop", "R_df_mc", "R_greedy", "beamforming", "multireceiver"))
    for row in _map(_multicast_row, [(x, g, P, cfg.spec()) for x, g, P in pts], cfg.workers):
        table.add(*row)
    return table


# ---------------------------------------------------------------------------
# side information


def _load_bundle(cfg: RunConfig) -> EntropyBundle | None:
    if cfg.pmf:
        try:
            return bundle(JointPmf.load(cfg.pmf))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read pmf {cfg.pmf}: {exc}") from None
    return None


def sideinfo_entropies(cfg: RunConfig) -> tuple[float, float]:
    b = _load_bundle(cfg)
    if b is not None:
        return b.pair[(1, 2)], b.pair[(1, 3)]
    if cfg.entropies is None:
        return SIDEINFO_ENTROPIES
    if len(cfg.entropies) != 2:
        raise ConfigError("sideinfo takes --entropies H12,H13")
    return tuple(cfg.entropies)


def cmd_sideinfo(cfg: RunConfig) -> CsvTable:
    """Bandwidth expansion and energy per source symbol across powers."""
    g = cfg.channel(SIDEINFO_GAINS)
    H12, H13 = sideinfo_entropies(cfg)
    rng = cfg.power_range or (Range(cfg.power, cfg.power, 1) if cfg.power else Range(1e-5, 10.0, 49))
    P = rng.values()
    tau_sep = sideinfo._separate_tau(g.g12, g.g13, H12, H13, P)
    tau_deg, _ = sideinfo._degraded_tau(g.g12, g.g13, H12, H13, P)
    c1, c0 = sideinfo._coop_tau(g.g12, g.g13, g.g23, H12, H13, P)
    f1, f0, _, _ = sideinfo._coop_fb_opt_tau(g.g12, g.g13, g.g23, H12, H13, P, cfg.spec())
    taus = (np.broadcast_to(tau_sep, P.shape), tau_deg, c1 + c0, f1 + f0)
    table = CsvTable(
        ("P", "tau_separate", "tau_degraded", "tau_coop", "tau_coop_fb", "E_separate", "E_degraded", "E_coop", "E_coop_fb")
    )
    for n, p in enumerate(P):
        t = [float(x[n]) for x in taus]
        table.add(p, *t, *(v * p for v in t))
    oriented = H12 / g.g12 <= H13 / g.g13 if g.g12 > 0 and g.g13 > 0 else None
    if oriented is not None:
        args = (g, H12, H13) if oriented else (g.swap_receivers(), H13, H12)
        table.notes["E1_min"] = sideinfo.min_energy_degraded(*args)
        table.notes["E2_min"] = sideinfo.min_energy_coop(*args)
    if P.size == 1 and not math.isfinite(table.rows[0][4]):
        raise InfeasibleError("no finite bandwidth expansion at this operating point")
    return table


# ---------------------------------------------------------------------------
# conference


def conference_bundle(cfg: RunConfig) -> EntropyBundle:
    b = _load_bundle(cfg)
    if b is not None:
        return b
    if cfg.entropies is not None:
        e = cfg.entropies
        if len(e) != 12:
            raise ConfigError(
                "conference takes 12 entropies: H(Si|Sj) for (i,j) in 12,13,21,23,31,32, "
                "then H(Si|Sj,Sk) for i=1..3, then H(Sj,Sk|Si) for i=1..3"
            )
        pairs = ((1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2))
        return EntropyBundle(dict(zip(pairs, e[:6])), dict(zip((1, 2, 3), e[6:9])), dict(zip((1, 2, 3), e[9:])))
    if cfg.seed is None:
        raise ConfigError("conference-genie needs --pmf, --entropies or --seed")
    return bundle(random_pmf(cfg.seed))


def _order_name(idx) -> str:
    return "-".join(str(n) for n in ORDERS[int(idx)])


def cmd_conference_genie(cfg: RunConfig) -> CsvTable:
    """Genie bound against the scheduled schemes for one instance across powers."""
    g = cfg.channel((1.0, 1.0, 1.0))
    b = conference_bundle(cfg)
    rng = cfg.power_range or (Range(cfg.power, cfg.power, 1) if cfg.power else Range(1e-3, 100.0, 21))
    P = rng.values()
    spec = cfg.spec(STAGE_SPEC)
    coop = StageTable(b, g, P, "coop", spec)
    deg = StageTable(b, g, P, "degraded", spec)
    oc, oi = coop.optimal()
    gc, gi = coop.greedy()
    nc, ni = deg.optimal()
    gen = np.broadcast_to(genie_tau(b, g, P), P.shape)
    table = CsvTable(
        ("P", "tau_genie", "tau_opt_coop", "tau_greedy_coop", "tau_opt_degraded", "order_opt_coop", "order_greedy_coop", "order_opt_degraded")
    )
    for n, p in enumerate(P):
        table.add(p, gen[n], oc[n], gc[n], nc[n], _order_name(oi[n]), _order_name(gi[n]), _order_name(ni[n]))
    if P.size == 1 and not math.isfinite(oc[0]):
        raise InfeasibleError("no finite conference schedule at this operating point")
    return table


def draw_instance(seq: np.random.SeedSequence, gain_db: float = MC_GAIN_DB):
    """Link amplitudes uniform in dB over ``[-gain_db, gain_db]`` and a binary flat-Dirichlet pmf."""
    gain_seq, pmf_seq = seq.spawn(2)
    db = np.random.default_rng(gain_seq).uniform(-gain_db, gain_db, 3)
    g = ChannelGains(*(db_to_amplitude(float(v)) for v in db))
    return g, random_pmf(pmf_seq)


def _ratio_db(E, E_gen):
    if E_gen > 0:
        return 10.0 * math.log10(E / E_gen)
    return 0.0 if E == 0 else math.inf


def _mc_row(args):
    k, seq, grid, spec = args
    g, pmf = draw_instance(seq)
    e = conference_energies(bundle(pmf), g, grid, spec)
    vals = (e.genie, e.opt_coop, e.greedy_coop, e.opt_degraded)
    feasible = all(math.isfinite(v) for v in vals)
    ratios = tuple(_ratio_db(v, e.genie) if feasible else math.nan for v in vals[1:])
    return (k, g.h12, g.h13, g.h23, *vals, *ratios, int(feasible))


MC_HEADER = (
    "draw", "h12", "h13", "h23", "E_gen", "E_oc", "E_gc", "E_nc", "dB_oc", "dB_gc", "dB_nc", "feasible",
)


def cmd_conference_mc(cfg: RunConfig) -> CsvTable:
    """Monte Carlo over random gains and correlations; one row per draw."""
    if cfg.seed is None:
        raise ConfigError("conference-mc needs --seed")
    grid = MC_GRID if cfg.per_decade is None else replace(MC_GRID, per_decade=cfg.per_decade)
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.draws)
    table = CsvTable(MC_HEADER)
    for row in _map(_mc_row, [(k, s, grid, cfg.spec(STAGE_SPEC)) for k, s in enumerate(seqs)], cfg.workers):
        table.add(*row)
    return table


@dataclass(frozen=True)
class McSummary:
    draws: int
    excluded: int
    within3_gc: float
    within3_oc: float
    within3_nc: float
    greedy_matches_optimal: float
    greedy_not_below_optimal: float

    def lines(self) -> list[str]:
        return [
            f"draws={self.draws}",
            f"excluded_infeasible={self.excluded}",
            f"within_3dB_greedy_coop={self.within3_gc:.6f}",
            f"within_3dB_optimal_coop={self.within3_oc:.6f}",
            f"within_3dB_noncoop={self.within3_nc:.6f}",
            f"greedy_within_1pct_of_optimal={self.greedy_matches_optimal:.6f}",
            f"greedy_not_below_optimal={self.greedy_not_below_optimal:.6f}",
        ]


def summarize_mc(table: CsvTable) -> tuple[McSummary, CsvTable]:
    """Fractions within 3 dB of the genie bound and a dB histogram of the feasible draws."""
    ok = [r for r in table.rows if r[MC_HEADER.index("feasible")]]
    idx = {k: MC_HEADER.index(k) for k in ("E_oc", "E_gc", "dB_oc", "dB_gc", "dB_nc")}
    n = len(ok)

    def frac(pred):
        return sum(1 for r in ok if pred(r)) / n if n else math.nan

    summary = McSummary(
        draws=len(table.rows),
        excluded=len(table.rows) - n,
        within3_gc=frac(lambda r: r[idx["dB_gc"]] <= 3.0),
        within3_oc=frac(lambda r: r[idx["dB_oc"]] <= 3.0),
        within3_nc=frac(lambda r: r[idx["dB_nc"]] <= 3.0),
        greedy_matches_optimal=frac(lambda r: r[idx["E_gc"]] <= 1.01 * r[idx["E_oc"]]),
        greedy_not_below_optimal=frac(lambda r: r[idx["E_gc"]] >= r[idx["E_oc"]]),
    )
    hist = CsvTable(("dB_lo", "dB_hi", "greedy_coop", "optimal_coop", "noncoop"))
    edges = list(HIST_EDGES_DB) + [math.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        counts = [sum(1 for r in ok if lo <= max(r[idx[c]], 0.0) < hi) for c in ("dB_gc", "dB_oc", "dB_nc")]
        hist.add(lo, hi, *counts)
    return summary, hist
