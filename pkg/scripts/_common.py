"""Shared helpers for the experiment scripts: run a CLI command into results/."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from halfduplex import cli

ROOT = Path(__file__).resolve().parent.parent


def parse(description: str) -> argparse.Namespace:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", default=str(ROOT / "results"), help="where CSVs and gnuplot scripts go")
    p.add_argument("--workers", type=int, default=1)
    return p.parse_args()


def run(out_dir: str, name: str, args: list[str], workers: int = 1) -> Path:
    path = Path(out_dir) / f"{name}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    code = cli.main([*args, "--out", str(path), "--plot", "--workers", str(workers)])
    if code != 0:
        sys.exit(code)
    print(f"wrote {path}")
    return path
