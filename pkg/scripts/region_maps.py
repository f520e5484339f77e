"""Best relay strategy over an (h12, h23) grid with h13 = 1, at low, unit and high power."""

from _common import parse, run

if __name__ == "__main__":
    a = parse(__doc__)
    for P in ("0.01", "1", "100"):
        run(
            a.out_dir,
            f"region_P{P}",
            ["relay-region", "--power", P, "--h12-range", "0.1:10:21", "--h23-range", "0.1:10:21"],
            a.workers,
        )
