"""Seven graph sub-sampling schemes producing fixed-size induced sub-graphs.

Schemes
-------
- ``rn``  uniform random nodes without replacement
- ``dn``  degree-weighted nodes, successive draws without replacement
- ``re``  uniform random edges until enough distinct endpoints
- ``bfs`` breadth-first layers from a random root
- ``dfs`` non-backtracking walk to random unvisited neighbors
- ``rnn`` closed neighborhoods of random unsampled seed nodes
- ``rw``  random walk counting distinct visited nodes

Every scheme returns exactly ``target`` distinct nodes; the sub-graph is
the parent's induced sub-graph on them. Batch-style schemes (re, bfs,
rnn) down-sample the batch that crosses the target uniformly at random
so the size lands exactly on target. Exploration schemes (bfs, dfs, rw)
restart at a uniform unvisited node when their component is exhausted.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, SubGraph, component_labels, take_subgraph
from .rngs import Seed, as_rng

SCHEMES = ("rn", "dn", "re", "bfs", "dfs", "rnn", "rw")

# rw restart backstop: consecutive steps without a new node before restart
RW_STALL_FACTOR = 50


def sample(g: Graph, scheme: str, target: int, seed: Seed) -> SubGraph:
    """Draw a sub-graph of exactly ``target`` nodes with the given scheme.

    Identical (g, scheme, target, seed) always yields an identical
    SubGraph.

    Raises:
        ValueError: if scheme is unknown or target is outside 1..n.
    """
    scheme = scheme.lower()
    if scheme not in SCHEMES:
        raise ValueError(f"unknown sampling scheme {scheme!r}; expected one of {SCHEMES}")
    if not 1 <= target <= g.n:
        raise ValueError(f"target must be in 1..{g.n}, got {target}")
    rng = as_rng(seed)
    fill_used = False
    if scheme == "rn":
        nodes = sample_rn(g, target, rng)
    elif scheme == "dn":
        nodes = sample_dn(g, target, rng)
    elif scheme == "re":
        nodes, fill_used = _sample_re_impl(g, target, rng)
    elif scheme == "bfs":
        nodes = sample_bfs(g, target, rng)
    elif scheme == "dfs":
        nodes = sample_dfs(g, target, rng)
    elif scheme == "rnn":
        nodes = sample_rnn(g, target, rng)
    else:
        nodes = sample_rw(g, target, rng)
    return take_subgraph(g, nodes, fill_used=fill_used)


def sample_rn(g: Graph, target: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw of ``target`` nodes without replacement."""
    return rng.choice(g.n, size=target, replace=False)


def sample_dn(g: Graph, target: int, rng: np.random.Generator) -> np.ndarray:
    """Successive degree-weighted draws without replacement.

    Implemented as an exponential race (one Exp(1)/degree key per node,
    smallest keys win), which has exactly the successive weighted
    sampling distribution. Zero-degree nodes are only used, via uniform
    fill, when fewer than ``target`` nodes have positive degree.

    Raises:
        ValueError: if the graph has no edges at all.
    """
    if g.m == 0:
        raise ValueError("dn sampling needs at least one positive-degree node")
    deg = g.degrees.astype(np.float64)
    keys = np.full(g.n, np.inf)
    pos = deg > 0
    keys[pos] = rng.exponential(size=int(pos.sum())) / deg[pos]
    n_pos = int(pos.sum())
    if n_pos >= target:
        return np.argpartition(keys, target - 1)[:target]
    chosen = np.flatnonzero(pos)
    rest = np.flatnonzero(~pos)
    fill = rng.choice(rest, size=target - n_pos, replace=False)
    return np.concatenate([chosen, fill])


def sample_re(g: Graph, target: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random edges until ``target`` distinct endpoints are drawn."""
    nodes, _ = _sample_re_impl(g, target, rng)
    return nodes


def _sample_re_impl(g: Graph, target: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """sample_re returning (nodes, fill_used).

    Edges are drawn uniformly without replacement; both endpoints enter
    the sample. The endpoint pair that crosses the target is
    down-sampled, and if edges run out first the remainder is filled
    with uniform random nodes (fill_used flag set).
    """
    chosen = np.zeros(g.n, dtype=bool)
    count = 0
    if g.m > 0:
        for e in rng.permutation(g.m):
            u, v = g.edges[e]
            new = [w for w in (u, v) if not chosen[w]]
            if count + len(new) > target:
                # the crossing batch: keep a uniform subset to land exactly
                keep = rng.choice(len(new), size=target - count, replace=False)
                for idx in keep:
                    chosen[new[idx]] = True
                count = target
                break
            for w in new:
                chosen[w] = True
            count += len(new)
            if count == target:
                break
    if count < target:
        rest = np.flatnonzero(~chosen)
        fill = rng.choice(rest.shape[0], size=target - count, replace=False)
        chosen[rest[fill]] = True
        return np.flatnonzero(chosen), True
    return np.flatnonzero(chosen), False


def sample_bfs(g: Graph, target: int, rng: np.random.Generator) -> np.ndarray:
    """Breadth-first layers from a uniform root.

    Whole layers are added at a time; the layer that crosses the target
    is down-sampled uniformly. Exhausted components trigger a restart at
    a uniform unvisited node.
    """
    visited = np.zeros(g.n, dtype=bool)
    count = 0
    frontier = np.empty(0, dtype=np.int64)
    while count < target:
        if frontier.size == 0:
            rest = np.flatnonzero(~visited)
            root = rest[rng.integers(rest.shape[0])]
            layer = np.array([root], dtype=np.int64)
        else:
            nbrs = np.concatenate([g.neighbors(v) for v in frontier])
            layer = np.unique(nbrs[~visited[nbrs]])
        if layer.size == 0:
            frontier = np.empty(0, dtype=np.int64)
            continue
        if count + layer.size > target:
            pick = rng.choice(layer.shape[0], size=target - count, replace=False)
            visited[layer[pick]] = True
            count = target
            break
        visited[layer] = True
        count += layer.size
        frontier = layer
    return np.flatnonzero(visited)


def sample_dfs(g: Graph, target: int, rng: np.random.Generator) -> np.ndarray:
    """Non-backtracking walk to uniform unvisited neighbors.

    A dead end (no unvisited neighbor) restarts the walk at a uniform
    unvisited node; there is no stack-based backtracking.
    """
    visited = np.zeros(g.n, dtype=bool)
    count = 0
    current = -1
    while count < target:
        if current < 0:
            rest = np.flatnonzero(~visited)
            current = int(rest[rng.integers(rest.shape[0])])
            visited[current] = True
            count += 1
            continue
        nbrs = g.neighbors(current)
        fresh = nbrs[~visited[nbrs]]
        if fresh.size == 0:
            current = -1
            continue
        current = int(fresh[rng.integers(fresh.shape[0])])
        visited[current] = True
        count += 1
    return np.flatnonzero(visited)


def sample_rnn(g: Graph, target: int, rng: np.random.Generator) -> np.ndarray:
    """Closed neighborhoods of uniform random unsampled seed nodes.

    Each round draws a seed uniformly from nodes not yet in the sample
    and adds the seed plus all its neighbors. The seed of the crossing
    round is kept and its new neighbors are down-sampled uniformly.
    """
    chosen = np.zeros(g.n, dtype=bool)
    count = 0
    while count < target:
        rest = np.flatnonzero(~chosen)
        seed_node = int(rest[rng.integers(rest.shape[0])])
        chosen[seed_node] = True
        count += 1
        if count == target:
            break
        nbrs = g.neighbors(seed_node)
        fresh = nbrs[~chosen[nbrs]]
        if count + fresh.size > target:
            pick = rng.choice(fresh.shape[0], size=target - count, replace=False)
            chosen[fresh[pick]] = True
            count = target
            break
        chosen[fresh] = True
        count += fresh.size
    return np.flatnonzero(chosen)


def sample_rw(g: Graph, target: int, rng: np.random.Generator,
              stall_factor: int = RW_STALL_FACTOR) -> np.ndarray:
    """Random walk counting distinct visited nodes.

    The walk steps to a uniform random neighbor; revisits are allowed
    but only distinct nodes count toward the target. It restarts at a
    uniform unvisited node when its component is fully visited or when
    ``stall_factor * target`` consecutive steps add nothing new.
    """
    visited = np.zeros(g.n, dtype=bool)
    count = 0
    comp = component_labels(g)
    comp_sizes = np.bincount(comp)
    comp_visited = np.zeros(comp_sizes.shape[0], dtype=np.int64)
    stall_limit = stall_factor * target
    current = -1
    stalled = 0
    while count < target:
        if current < 0:
            rest = np.flatnonzero(~visited)
            current = int(rest[rng.integers(rest.shape[0])])
            visited[current] = True
            count += 1
            comp_visited[comp[current]] += 1
            stalled = 0
            continue
        if comp_visited[comp[current]] == comp_sizes[comp[current]]:
            current = -1
            continue
        nbrs = g.neighbors(current)
        if nbrs.size == 0:
            current = -1
            continue
        current = int(nbrs[rng.integers(nbrs.shape[0])])
        if visited[current]:
            stalled += 1
            if stalled >= stall_limit:
                current = -1
        else:
            visited[current] = True
            count += 1
            comp_visited[comp[current]] += 1
            stalled = 0
    return np.flatnonzero(visited)
