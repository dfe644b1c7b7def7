"""Divide-and-conquer core-periphery detection.

Pipeline: draw B sub-graphs, maximize the Borgatti-Everett correlation
over core labelings on each, count per node how often it landed in the
core, average the counts into a core score in [0, 1], and binarize the
scores with a correlation-maximizing sweep.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .graph import Graph
from .rngs import Seed
from .sampling import sample


def _rho_from_counts(n: int, m: int, k: int, m1: int) -> float:
    """Pearson correlation between the adjacency and the ideal pattern.

    Closed form over the n(n-1)/2 node pairs: the ideal pattern is 1
    for pairs touching the core (both endpoints core, or one core one
    periphery) and 0 for periphery-periphery pairs. ``m1`` counts edges
    touching the core. All branches of the package compute the value
    with exactly these operations so equal inputs give equal floats.
    """
    t = n * (n - 1) // 2
    t1 = k * (2 * n - k - 1) // 2
    num = t * m1 - m * t1
    d1 = m * (t - m)
    d2 = t1 * (t - t1)
    if d1 == 0 or d2 == 0:
        raise ValueError("correlation undefined: constant adjacency or labels")
    return float(num) / math.sqrt(float(d1) * float(d2))


def be_metric(g: Graph, labels: np.ndarray) -> float:
    """Core-periphery correlation of a binary labeling (1=core).

    Raises:
        ValueError: if labels are not binary 0/1 of length n, or the
            correlation is undefined (no edges, complete graph, empty
            core, or empty periphery).
    """
    labels = np.asarray(labels)
    if labels.shape != (g.n,):
        raise ValueError(f"labels must have length {g.n}")
    vals = np.unique(labels)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValueError("labels must be binary with 1 marking the core")
    k = int(np.count_nonzero(labels))
    core = labels.astype(bool)
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    m1 = int(np.count_nonzero(core[e0] | core[e1]))
    return _rho_from_counts(g.n, g.m, k, m1)


_EXACT_OPTIMIZER_NODE_CAP = 12


def optimize_core_labels(g: Graph, seed: Seed = None) -> np.ndarray:
    """Maximize the core-periphery correlation over binary labelings.

    Small graphs (n <= 12) are solved exactly by enumerating every core
    set; larger graphs run steepest-ascent single-flip hill climbing
    from several degree-based starting cores (nodes above the median
    degree, the best descending-degree prefix, and the top-degree node
    alone), keeping the best result. Either way the output admits no
    improving single flip, never labels everything core or everything
    periphery, and is deterministic; the ``seed`` parameter is accepted
    for interface uniformity and does not consume randomness.

    Raises:
        ValueError: if the graph has no edges or is complete.
    """
    n = g.n
    m = g.m
    t = n * (n - 1) // 2
    if m == 0 or m == t:
        raise ValueError("correlation undefined on edgeless or complete graphs")
    if n <= _EXACT_OPTIMIZER_NODE_CAP:
        return _exact_core_labels(g)
    best_core: Optional[np.ndarray] = None
    best_rho = -np.inf
    for start in _climb_starts(g):
        core, rho = _climb_from(g, start)
        if rho > best_rho:
            best_core, best_rho = core, rho
    assert best_core is not None
    return best_core.astype(np.int64)


def _exact_core_labels(g: Graph) -> np.ndarray:
    """Global optimum by enumerating all core sets of size 1..n-2.

    Size n-1 is excluded: every node pair then touches the core, so the
    ideal pattern is constant and the correlation undefined. Ties go to
    the smallest core, then the lexicographically smallest node set.
    """
    n, m = g.n, g.m
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    t = n * (n - 1) // 2
    d1 = m * (t - m)
    best_rho = -np.inf
    best_nodes: Optional[np.ndarray] = None
    for k in range(1, n - 1):
        combos = np.array(list(itertools.combinations(range(n), k)),
                          dtype=np.int64)
        member = np.zeros((combos.shape[0], n), dtype=bool)
        member[np.arange(combos.shape[0])[:, None], combos] = True
        m1 = np.count_nonzero(member[:, e0] | member[:, e1], axis=1)
        t1 = k * (2 * n - k - 1) // 2
        d2 = t1 * (t - t1)
        rho = (t * m1 - m * t1).astype(np.float64) / math.sqrt(
            float(d1) * float(d2))
        j = int(np.argmax(rho))
        if rho[j] > best_rho:
            best_rho = float(rho[j])
            best_nodes = combos[j]
    labels = np.zeros(n, dtype=np.int64)
    labels[best_nodes] = 1
    return labels


def _climb_starts(g: Graph):
    """Deterministic starting cores for the hill climbs, best-first ties."""
    n = g.n
    median = np.median(g.degrees)
    core = g.degrees > median
    k = int(np.count_nonzero(core))
    if k == 0 or k == n:
        # constant-degree graphs: fall back to the first half by id
        core = np.zeros(n, dtype=bool)
        core[: max(1, n // 2)] = True
    yield core
    yield binarize_by_sweep(g, g.degrees.astype(np.float64)).labels.astype(bool)
    order = np.lexsort((np.arange(n), -g.degrees))
    top = np.zeros(n, dtype=bool)
    top[order[0]] = True
    yield top


def _climb_from(g: Graph, core: np.ndarray) -> Tuple[np.ndarray, float]:
    """Steepest-ascent single flips from ``core`` until none improves."""
    core = core.copy()
    n, m = g.n, g.m
    k = int(np.count_nonzero(core))
    # per-node count of core neighbors, maintained across flips
    core_nbrs = np.zeros(n, dtype=np.int64)
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    np.add.at(core_nbrs, e0, core[e1].astype(np.int64))
    np.add.at(core_nbrs, e1, core[e0].astype(np.int64))
    m1 = int(np.count_nonzero(core[e0] | core[e1]))
    deg = g.degrees
    while True:
        # flipping periphery node v to core: k+1, m1 += periphery edges of v
        # flipping core node v to periphery: k-1, m1 -= edges of v whose
        # other endpoint is periphery
        peri_edges = deg - core_nbrs
        new_k = np.where(core, k - 1, k + 1)
        new_m1 = np.where(core, m1 - peri_edges, m1 + peri_edges)
        valid = (new_k > 0) & (new_k < n)
        rho_new = _rho_vector(n, m, new_k, new_m1, valid)
        best = int(np.argmax(rho_new))
        current = _rho_from_counts(n, m, k, m1)
        if not valid[best] or rho_new[best] <= current:
            return core, current
        k = int(new_k[best])
        m1 = int(new_m1[best])
        if core[best]:
            core[best] = False
            core_nbrs[g.neighbors(best)] -= 1
        else:
            core[best] = True
            core_nbrs[g.neighbors(best)] += 1


def _rho_vector(n: int, m: int, k_arr: np.ndarray, m1_arr: np.ndarray,
                valid: np.ndarray) -> np.ndarray:
    """Vectorized correlation over candidate (k, m1) pairs.

    Uses the same operation order as the scalar form so a candidate and
    its scalar evaluation agree bit for bit.
    """
    t = n * (n - 1) // 2
    t1 = k_arr * (2 * n - k_arr - 1) // 2
    num = t * m1_arr - m * t1
    d1 = m * (t - m)
    d2 = t1 * (t - t1)
    ok = valid & (d2 > 0) & (d1 > 0)
    out = np.full(k_arr.shape, -np.inf)
    denom = np.sqrt(d1 * d2[ok].astype(np.float64))
    out[ok] = num[ok].astype(np.float64) / denom
    return out


@dataclass(frozen=True)
class CoreScore:
    """Per-node core frequencies from the divide-and-conquer run."""

    x: np.ndarray
    b: int
    errors: int

    @property
    def c_hat(self) -> np.ndarray:
        """Core score: times in the core divided by the sub-sample count."""
        return self.x.astype(np.float64) / float(self.b)


def run_cp(g: Graph, q: float, b: int, scheme: str, seed: int) -> CoreScore:
    """Full divide-and-conquer core-periphery scoring.

    Draws ``b`` sub-graphs of round(q*n) nodes (at least 2) and runs the
    greedy correlation optimizer on each; a node's score is the number
    of sub-graphs that placed it in the core divided by ``b``.
    Sub-graphs where the correlation is undefined (for example edgeless
    draws) contribute nothing but still count toward ``b``.

    Raises:
        ValueError: for b < 1 or q outside (0, 1].
    """
    if b < 1:
        raise ValueError("need at least one sub-sample")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    target = max(2, min(g.n, int(np.floor(q * g.n + 0.5))))
    x = np.zeros(g.n, dtype=np.int64)
    errors = 0
    for idx in range(b):
        sub = sample(g, scheme, target, (seed, idx))
        try:
            labels = optimize_core_labels(sub.graph)
        except ValueError:
            errors += 1
            continue
        x[sub.parent_ids[labels == 1]] += 1
    return CoreScore(x=x, b=b, errors=errors)


@dataclass(frozen=True)
class CoreSweep:
    """Binarized core assignment chosen by the correlation sweep."""

    labels: np.ndarray
    k: int
    rho: float


def binarize_by_sweep(g: Graph, scores: np.ndarray) -> CoreSweep:
    """Threshold core scores by maximizing the core-periphery correlation.

    Orders nodes by descending score (ties by descending degree, then
    ascending id) and evaluates every prefix of size 1..n-1 as the
    core, returning the prefix with the highest correlation; ties go to
    the smallest core. Prefix sizes where the correlation is undefined
    are skipped.

    Raises:
        ValueError: if the correlation is undefined at every size
            (edgeless or complete graphs).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (g.n,):
        raise ValueError(f"scores must have length {g.n}")
    n = g.n
    m = g.m
    order = np.lexsort((np.arange(n), -g.degrees.astype(np.float64), -scores))
    # m1 for core = first j nodes of `order`: add each node's edges not
    # already counted (neighbors earlier in the order)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    rhos = np.full(n - 1, -np.inf)
    t = n * (n - 1) // 2
    d1 = m * (t - m)
    m1 = 0
    for j, v in enumerate(order[:-1]):
        nbr_ranks = rank[g.neighbors(v)]
        m1 += int(g.degrees[v]) - int(np.count_nonzero(nbr_ranks < j))
        k = j + 1
        t1 = k * (2 * n - k - 1) // 2
        d2 = t1 * (t - t1)
        if d1 == 0 or d2 == 0:
            continue
        num = t * m1 - m * t1
        rhos[j] = float(num) / math.sqrt(float(d1) * float(d2))
    if not np.any(np.isfinite(rhos)):
        raise ValueError("correlation undefined at every core size")
    best = int(np.argmax(rhos))
    labels = np.zeros(n, dtype=np.int64)
    labels[order[: best + 1]] = 1
    return CoreSweep(labels=labels, k=best + 1, rho=float(rhos[best]))
