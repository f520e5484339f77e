"""Command line: ``python3 -m halfduplex <command> [flags]``.

Exit status is 0 on success, 2 on a configuration error and 3 when a
single-point query has no finite answer. ``--config FILE`` reads
``key=value`` lines named like the long flags; flags on the command line win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .harness import ConfigError, InfeasibleError, Range, RunConfig
from .optimize import GridSpec

COMMANDS = {
    "relay-sweep": (harness.cmd_relay_sweep, "line"),
    "relay-region": (harness.cmd_region_map, "region"),
    "multicast-sweep": (harness.cmd_multicast_sweep, "line"),
    "sideinfo": (harness.cmd_sideinfo, "line"),
    "conference-genie": (harness.cmd_conference_genie, "line"),
    "conference-mc": (harness.cmd_conference_mc, "histogram"),
}

HELP = {
    "relay-sweep": "optimised relay rates (off, ODF, DF, CF, FB) with cut-set bounds",
    "relay-region": "winning relay strategy on an (h12, h23) grid with h13 = 1",
    "multicast-sweep": "non-cooperative, DF and greedy multicast rates",
    "sideinfo": "bandwidth expansion and energy with receiver side information",
    "conference-genie": "genie bound vs scheduled conference schemes for one instance",
    "conference-mc": "Monte Carlo of conference minimum energies relative to the genie bound",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> GridSpec:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--grid takes res,rounds,shrink")
    try:
        return GridSpec(int(parts[0]), int(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range(text: str) -> Range:
    try:
        return Range.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file mirroring the long flags")
    common.add_argument("--gains", type=_floats, help="h12,h13,h23 amplitudes (dB with --db)")
    common.add_argument("--db", action="store_true", help="read --gains and --gain-range in dB (20 log10 amplitude)")
    common.add_argument("--power", type=float, help="single transmit power")
    common.add_argument("--power-range", type=_range, help="log-spaced powers lo:hi:steps")
    common.add_argument("--sweep", default="P", choices=("P", "h12", "h13", "h23"), help="swept variable")
    common.add_argument("--gain-range", type=_range, help="log-spaced values lo:hi:steps for a gain sweep")
    common.add_argument("--h12-range", type=_range, help="relay-region h12 grid lo:hi:steps")
    common.add_argument("--h23-range", type=_range, help="relay-region h23 grid lo:hi:steps")
    common.add_argument("--seed", type=int, help="master seed for stochastic commands")
    common.add_argument("--draws", type=int, default=10_000, help="Monte Carlo draws (default 10000)")
    common.add_argument("--grid", type=_grid, help="optimiser grid res,rounds,shrink")
    common.add_argument(
        "--per-decade",
        type=int,
        help=f"power grid density of the Monte Carlo energy search (default {harness.MC_GRID.per_decade})",
    )
    common.add_argument("--out", help="CSV output path (default stdout)")
    common.add_argument("--pmf", help="joint pmf file: 'n1 n2 n3' then probabilities, s1 major")
    common.add_argument("--entropies", type=_floats, help="H12,H13 (sideinfo) or 12 values (conference-genie)")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--plot", action="store_true", help="also write a gnuplot script next to --out")

    parser = _Parser(
        prog="halfduplex",
        description="Cooperation strategies for the three-node half-duplex Gaussian network.",
        epilog=(
            f"Monte Carlo draws use link amplitudes uniform in dB over +-{harness.MC_GAIN_DB:g} dB "
            "and flat-Dirichlet pmfs on binary alphabets. Minimum energies are searched over "
            "P in [1e-6, 1e2]; energy grows with P, so minima sit at the lower edge."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
    return parser


_BOOL_FLAGS = {"db", "plot"}


def _config_args(path: str) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    args = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if key.replace("-", "_") in _BOOL_FLAGS:
            if val.lower() in ("1", "true", "yes", "on"):
                args.append(flag)
            elif val.lower() not in ("0", "false", "no", "off"):
                raise ConfigError(f"{path}:{n}: {key} must be true or false")
        else:
            args += [flag, val]
    return args


def parse_config(argv: list[str]) -> tuple[RunConfig, bool]:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        # file values first so explicit flags override them
        ns = parser.parse_args([argv[0], *_config_args(ns.config), *argv[1:]])
    cfg = RunConfig(
        command=ns.command,
        gains=ns.gains,
        db=ns.db,
        power=ns.power,
        power_range=ns.power_range,
        sweep=ns.sweep,
        gain_range=ns.gain_range,
        h12_range=ns.h12_range,
        h23_range=ns.h23_range,
        seed=ns.seed,
        draws=ns.draws,
        grid=ns.grid,
        per_decade=ns.per_decade,
        out=ns.out,
        pmf=ns.pmf,
        entropies=ns.entropies,
        workers=ns.workers,
    )
    return cfg, ns.plot


def run(cfg: RunConfig, plot: bool = False, stdout=None) -> harness.CsvTable:
    stdout = stdout or sys.stdout
    fn, kind = COMMANDS[cfg.command]
    table = fn(cfg)
    if cfg.command == "conference-mc":
        summary, hist = harness.summarize_mc(table)
        for line in summary.lines():
            print(line, file=sys.stderr if cfg.out is None else stdout)
    if cfg.out is None:
        stdout.write(table.to_csv())
    else:
        out = Path(cfg.out)
        table.write(out)
        for key, val in table.notes.items():
            print(f"{key}={val:.9g}", file=stdout)
        if cfg.command == "conference-mc":
            hist_path = out.with_name(out.stem + "_hist.csv")
            hist.write(hist_path)
            if plot:
                hist_path.with_suffix(".gp").write_text(harness.emit_plot_script(hist, "histogram", str(hist_path)))
        elif plot:
            out.with_suffix(".gp").write_text(
                harness.emit_plot_script(table, kind, str(out), logx=cfg.command != "relay-region")
            )
    return table


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg, plot = parse_config(argv)
        run(cfg, plot)
    except ConfigError as exc:
        print(f"halfduplex: error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"halfduplex: infeasible: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        # domain validation (negative gains, bad pmf values, ...) is a config problem
        print(f"halfduplex: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
