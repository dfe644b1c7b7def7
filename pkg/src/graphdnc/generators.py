"""Stochastic block model generation, including the core-periphery variant.

Edges are Bernoulli draws per node pair; generation works block pair by
block pair, drawing the edge count from its Binomial law and then
placing that many distinct pair slots uniformly, which matches the
independent-Bernoulli distribution exactly while running in O(m)
expected time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .graph import Graph, _build
from .rngs import Seed, as_rng


@dataclass(frozen=True)
class SbmSpec:
    """Block-model parameters.

    Attributes:
        n: node count.
        block_sizes: per-block node counts, summing to n.
        p: K x K symmetric edge-probability matrix.
        sparsity: global multiplier applied to p (default 1).
    """

    n: int
    block_sizes: Tuple[int, ...]
    p: np.ndarray
    sparsity: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        object.__setattr__(self, "p", p)
        k = len(self.block_sizes)
        if sum(self.block_sizes) != self.n:
            raise ValueError("block sizes must sum to n")
        if any(s < 0 for s in self.block_sizes):
            raise ValueError("block sizes must be non-negative")
        if p.shape != (k, k):
            raise ValueError("probability matrix shape must match block count")
        if not np.allclose(p, p.T):
            raise ValueError("probability matrix must be symmetric")
        eff = self.sparsity * p
        if eff.min() < 0 or eff.max() > 1:
            raise ValueError("effective edge probabilities must lie in [0, 1]")

    def is_cp_valid(self) -> bool:
        """True for a two-block model with p11 > p12 > p22 > 0."""
        if len(self.block_sizes) != 2:
            return False
        p11, p12, p22 = self.p[0, 0], self.p[0, 1], self.p[1, 1]
        return bool(p11 > p12 > p22 > 0)


def generate_sbm(spec: SbmSpec, seed: Seed) -> Tuple[Graph, np.ndarray]:
    """Draw a graph from the block model; returns (graph, block labels).

    Labels are block indices 0..K-1 in block order (block 0 first), so
    for a core-periphery model the first block is the core.
    """
    rng = as_rng(seed)
    starts = np.concatenate([[0], np.cumsum(spec.block_sizes)]).astype(np.int64)
    k = len(spec.block_sizes)
    chunks = []
    for a in range(k):
        for b in range(a, k):
            prob = float(spec.sparsity * spec.p[a, b])
            sa = spec.block_sizes[a]
            sb = spec.block_sizes[b]
            n_pairs = sa * (sa - 1) // 2 if a == b else sa * sb
            if n_pairs == 0 or prob == 0.0:
                continue
            count = int(rng.binomial(n_pairs, prob))
            if count == 0:
                continue
            flat = _distinct_uniform(rng, n_pairs, count)
            if a == b:
                i, j = _decode_triangular(flat, sa)
            else:
                i, j = flat // sb, flat % sb
            chunks.append(np.stack([i + starts[a], j + starts[b]], axis=1))
    labels = np.repeat(np.arange(k, dtype=np.int64), spec.block_sizes)
    if not chunks:
        return _build(spec.n, np.empty((0, 2), dtype=np.int64)), labels
    edges = np.concatenate(chunks)
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    order = np.lexsort((hi, lo))
    return _build(spec.n, np.stack([lo, hi], axis=1)[order]), labels


def _distinct_uniform(rng: np.random.Generator, n_pairs: int, count: int) -> np.ndarray:
    """``count`` distinct uniform integers from [0, n_pairs)."""
    if count * 2 >= n_pairs:
        return rng.permutation(n_pairs)[:count].astype(np.int64)
    draw = np.unique(rng.integers(0, n_pairs, size=count))
    while draw.shape[0] < count:
        extra = rng.integers(0, n_pairs, size=count - draw.shape[0])
        draw = np.unique(np.concatenate([draw, extra]))
    return draw.astype(np.int64)


def _decode_triangular(flat: np.ndarray, s: int) -> Tuple[np.ndarray, np.ndarray]:
    """Decode flat indices of the strict upper triangle of an s x s block.

    Pair (i, j), i < j, has flat index i*s - i*(i+1)/2 + (j - i - 1).
    """
    f = flat.astype(np.float64)
    i = np.floor(((2 * s - 1) - np.sqrt((2 * s - 1) ** 2 - 8.0 * f)) / 2.0).astype(np.int64)
    # fix float rounding at row boundaries
    row_start = i * s - i * (i + 1) // 2
    too_big = flat < row_start
    i[too_big] -= 1
    row_start = i * s - i * (i + 1) // 2
    next_start = (i + 1) * s - (i + 1) * (i + 2) // 2
    too_small = flat >= next_start
    i[too_small] += 1
    row_start = i * s - i * (i + 1) // 2
    j = flat - row_start + i + 1
    return i, j


def cp_sbm_from_settings(n: int, p11: float, alpha: float,
                         seed: Seed) -> Tuple[Graph, np.ndarray]:
    """Core-periphery block model with p12 = p11/2 and p22 = 0.001.

    The core has k = round(alpha * n) nodes (at least 1), placed first.
    Returns (graph, binary labels) with 1 marking core nodes.

    Raises:
        ValueError: if p11 <= 0.002, which breaks p11 > p12 > p22.
    """
    p12 = p11 / 2.0
    p22 = 0.001
    if not p11 > p12 > p22:
        raise ValueError(f"p11={p11} gives p12={p12} <= p22={p22}; need p11 > 0.002")
    k = max(1, int(np.floor(alpha * n + 0.5)))
    if k >= n:
        raise ValueError("core size must be smaller than n")
    spec = SbmSpec(n=n, block_sizes=(k, n - k),
                   p=np.array([[p11, p12], [p12, p22]]))
    g, labels = generate_sbm(spec, seed)
    return g, (labels == 0).astype(np.int64)


def expected_edge_count(spec: SbmSpec) -> float:
    """Expected number of edges under the block model."""
    total = 0.0
    k = len(spec.block_sizes)
    for a in range(k):
        for b in range(a, k):
            sa, sb = spec.block_sizes[a], spec.block_sizes[b]
            n_pairs = sa * (sa - 1) // 2 if a == b else sa * sb
            total += n_pairs * float(spec.sparsity * spec.p[a, b])
    return total
