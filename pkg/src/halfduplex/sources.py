"""Finite joint distributions of (S1, S2, S3) and the entropies they induce.

All entropies are in bits. Node indices are 1-based throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

MAX_ALPHABET = 8
NODES = (1, 2, 3)


@dataclass(frozen=True)
class JointPmf:
    """Probability tensor ``p[s1, s2, s3]``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 3:
            raise ValueError(f"joint pmf must be 3-dimensional, got shape {p.shape}")
        if any(n < 1 or n > MAX_ALPHABET for n in p.shape):
            raise ValueError(f"alphabet sizes must lie in [1, {MAX_ALPHABET}], got {p.shape}")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ValueError("pmf entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"pmf must sum to 1, sums to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.p.shape

    @classmethod
    def from_text(cls, text: str) -> "JointPmf":
        """Parse ``n1 n2 n3`` followed by the probabilities in s1-major order.

        Totals off by at most 1e-6 (decimal rounding in hand-written files)
        are renormalised.
        """
        tokens = text.split()
        if len(tokens) < 3:
            raise ValueError("pmf text needs a 'n1 n2 n3' header")
        sizes = tuple(int(tok) for tok in tokens[:3])
        vals = np.array([float(tok) for tok in tokens[3:]])
        if vals.size != math.prod(sizes):
            raise ValueError(f"expected {math.prod(sizes)} probabilities, got {vals.size}")
        total = vals.sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total}, not 1")
        return cls((vals / total).reshape(sizes))

    @classmethod
    def load(cls, path) -> "JointPmf":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        header = " ".join(str(n) for n in self.sizes)
        body = " ".join(repr(float(v)) for v in self.p.reshape(-1))
        return f"{header}\n{body}\n"


def _entropy(p: np.ndarray) -> float:
    q = p[p > 0]
    return float(-(q * np.log2(q)).sum())


def joint_entropy(pmf: JointPmf, nodes: Iterable[int]) -> float:
    """Entropy of the marginal of ``S_nodes``; the empty set has entropy 0."""
    keep = sorted(set(nodes))
    if not keep:
        return 0.0
    if any(n not in NODES for n in keep):
        raise ValueError(f"node indices must be in {NODES}, got {keep}")
    drop = tuple(i for i in range(3) if i + 1 not in keep)
    return _entropy(pmf.p.sum(axis=drop))


def cond_entropy(pmf: JointPmf, target: Iterable[int], given: Iterable[int] = ()) -> float:
    """``H(S_target | S_given)`` in bits."""
    target, given = set(target), set(given)
    if not target:
        raise ValueError("target set is empty")
    if target & given:
        raise ValueError("target and given sets must be disjoint")
    h = joint_entropy(pmf, target | given) - joint_entropy(pmf, given)
    return max(h, 0.0)


def _others(i: int) -> tuple[int, int]:
    j, k = (n for n in NODES if n != i)
    return j, k


@dataclass(frozen=True)
class EntropyBundle:
    """Conditional entropies consumed by the side-information and conference formulas.

    ``pair[(i, j)] = H(Si|Sj)``, ``triple[i] = H(Si|Sj,Sk)`` and
    ``joint_given[i] = H(Sj,Sk|Si)``. Values need not be realisable by a pmf
    unless the bundle comes from :func:`bundle`.
    """

    pair: dict
    triple: dict
    joint_given: dict

    def __post_init__(self):
        need_pair = {(i, j) for i in NODES for j in NODES if i != j}
        if set(self.pair) != need_pair:
            raise ValueError("pair entropies must cover every ordered pair (i, j), i != j")
        if set(self.triple) != set(NODES) or set(self.joint_given) != set(NODES):
            raise ValueError("triple and joint_given entropies must cover nodes 1, 2, 3")
        for table in (self.pair, self.triple, self.joint_given):
            for key, v in table.items():
                if not math.isfinite(v) or v < 0:
                    raise ValueError(f"entropy {key} must be finite and >= 0, got {v!r}")

    def h(self, i: int, given: Iterable[int]) -> float:
        """``H(Si | S_given)`` for a knowledge set that contains another node."""
        given = set(given)
        if i in given:
            return 0.0
        if len(given) == 1:
            (j,) = given
            return self.pair[(i, j)]
        if len(given) == 2:
            return self.triple[i]
        raise KeyError(f"no entropy stored for H(S{i} | {sorted(given)})")

    @classmethod
    def symmetric(cls, pair: float, triple: float, joint_given: float) -> "EntropyBundle":
        return cls(
            {(i, j): pair for i in NODES for j in NODES if i != j},
            {i: triple for i in NODES},
            {i: joint_given for i in NODES},
        )


def bundle(pmf: JointPmf) -> EntropyBundle:
    pair = {(i, j): cond_entropy(pmf, {i}, {j}) for i, j in itertools.permutations(NODES, 2)}
    triple = {i: cond_entropy(pmf, {i}, _others(i)) for i in NODES}
    joint_given = {i: cond_entropy(pmf, _others(i), {i}) for i in NODES}
    return EntropyBundle(pair, triple, joint_given)


def random_pmf(seed, sizes: tuple[int, int, int] = (2, 2, 2)) -> JointPmf:
    """Flat-Dirichlet joint pmf drawn from a seeded PCG64 stream.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts, including
    a spawned :class:`numpy.random.SeedSequence`.
    """
    if any(n < 1 or n > MAX_ALPHABET for n in sizes):
        raise ValueError(f"alphabet sizes must lie in [1, {MAX_ALPHABET}]")
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(math.prod(sizes)))
    # guard against a (practically impossible) underflow to an exact zero
    w = np.maximum(w, np.finfo(float).tiny)
    w = w / w.sum()
    p = w.reshape(sizes)
    p = p / p.sum()
    return JointPmf(p)
