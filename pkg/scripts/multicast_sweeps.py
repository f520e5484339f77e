"""Multicast rates: power sweep with h12 > h13, and h23 sweeps with h12 > h13 and h12 = h13."""

from _common import parse, run

if __name__ == "__main__":
    a = parse(__doc__)
    run(a.out_dir, "multicast_vs_power", ["multicast-sweep", "--power-range", "0.01:1000:41"], a.workers)
    for name, gains in (("multicast_vs_h23", "1.1,1,1"), ("multicast_vs_h23_equal", "1,1,1")):
        run(
            a.out_dir,
            name,
            ["multicast-sweep", "--gains", gains, "--sweep", "h23", "--gain-range", "1:1000:31", "--power", "1"],
            a.workers,
        )
