"""Bandwidth expansion and energy per source symbol with receiver side information."""

from _common import parse, run

if __name__ == "__main__":
    a = parse(__doc__)
    run(a.out_dir, "sideinfo", ["sideinfo", "--power-range", "1e-5:10:49"], a.workers)
