"""Monte Carlo of conference minimum energies relative to the genie bound.

Prints the summary fractions and writes the per-draw CSV plus a dB histogram.
"""

import argparse

from _common import ROOT, run

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default=str(ROOT / "results"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--draws", type=int, default=10_000)
    a = p.parse_args()
    run(a.out_dir, "conference_mc", ["conference-mc", "--seed", str(a.seed), "--draws", str(a.draws)], a.workers)
