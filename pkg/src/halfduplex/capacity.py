"""Capacity primitives and the channel-gain model shared by every strategy.

Rates are in bits per channel use. Noise variance is fixed to one, so every
SNR argument is a raw ``h**2 * P`` product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2E = math.log2(math.e)
_INV_LN2 = 1.0 / math.log(2.0)


def capacity(x):
    """AWGN capacity ``0.5 * log2(1 + x)``.

    Accepts scalars or arrays. ``inf`` maps to ``inf``; negative SNR raises.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"capacity needs a nonnegative SNR, got {x!r}")
    out = 0.5 * np.log1p(arr) * _INV_LN2
    if out.ndim == 0:
        return float(out)
    return out


def _cap(x):
    # unchecked array version for the inner loops
    return 0.5 * np.log1p(x) * _INV_LN2


def db_to_amplitude(db: float) -> float:
    """Convert a power ratio in dB to a linear amplitude gain."""
    return 10.0 ** (db / 20.0)


def db_to_power(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ChannelGains:
    """Symmetric amplitude gains of the three links (``h_ij == h_ji``)."""

    h12: float
    h13: float
    h23: float

    def __post_init__(self):
        for name in ("h12", "h13", "h23"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @classmethod
    def from_db(cls, h12_db: float, h13_db: float, h23_db: float) -> "ChannelGains":
        return cls(db_to_amplitude(h12_db), db_to_amplitude(h13_db), db_to_amplitude(h23_db))

    @property
    def g12(self) -> float:
        return self.h12 * self.h12

    @property
    def g13(self) -> float:
        return self.h13 * self.h13

    @property
    def g23(self) -> float:
        return self.h23 * self.h23

    def swap_receivers(self) -> "ChannelGains":
        """Exchange the roles of node-2 and node-3."""
        return ChannelGains(self.h13, self.h12, self.h23)

    def link(self, i: int, j: int) -> float:
        """Amplitude gain between nodes ``i`` and ``j`` (1-based)."""
        pair = frozenset((i, j))
        if pair == {1, 2}:
            return self.h12
        if pair == {1, 3}:
            return self.h13
        if pair == {2, 3}:
            return self.h23
        raise ValueError(f"no link between {i} and {j}")


def check_power(P) -> None:
    if np.any(np.asarray(P) < 0) or not np.all(np.isfinite(P)):
        raise ValueError(f"power must be finite and >= 0, got {P!r}")


def relay_off_rate(g: ChannelGains, P: float) -> float:
    """Direct source-destination rate with the relay silent."""
    check_power(P)
    return capacity(g.g13 * P)


def cut_set_bounds(g: ChannelGains, P: float) -> tuple[float, float]:
    """Return ``(beamforming, multireceiver)`` cut-set benchmarks."""
    check_power(P)
    return capacity((g.g13 + g.g23) * P), capacity((g.g13 + g.g12) * P)
