"""Relay-channel rates versus power and versus the relay-destination gain."""

from _common import parse, run

if __name__ == "__main__":
    a = parse(__doc__)
    run(a.out_dir, "relay_vs_power", ["relay-sweep", "--power-range", "0.01:1000:41"], a.workers)
    # h23 sweep at P = 1 with h12 = 1.8, h13 = 1
    run(
        a.out_dir,
        "relay_vs_h23",
        ["relay-sweep", "--sweep", "h23", "--gain-range", "1:100:31", "--power", "1"],
        a.workers,
    )
