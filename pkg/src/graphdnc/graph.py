"""Immutable simple undirected graph with dense 0..n-1 node ids.

The representation is a CSR-style adjacency (sorted neighbor lists) plus
a canonical edge array with rows (i, j), i < j, in lexicographic order.
All arrays are frozen after construction, so a Graph can be shared
freely across threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np


class Graph:
    """Simple undirected graph: no self-loops, no duplicate edges."""

    __slots__ = ("n", "edges", "indptr", "indices", "degrees")

    def __init__(self, n: int, edges: np.ndarray, indptr: np.ndarray,
                 indices: np.ndarray, degrees: np.ndarray):
        self.n = int(n)
        self.edges = edges
        self.indptr = indptr
        self.indices = indices
        self.degrees = degrees
        for arr in (self.edges, self.indptr, self.indices, self.degrees):
            arr.flags.writeable = False

    @property
    def m(self) -> int:
        """Number of edges."""
        return int(self.edges.shape[0])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of node v (read-only view)."""
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _build(n: int, edges: np.ndarray) -> Graph:
    """Assemble a Graph from a canonical (i < j, lexsorted, unique) edge array."""
    edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    m = edges.shape[0]
    if m == 0:
        return Graph(n, edges, np.zeros(n + 1, dtype=np.int64),
                     np.empty(0, dtype=np.int64), np.zeros(n, dtype=np.int64))
    both = np.concatenate([edges, edges[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    degrees = np.bincount(both[:, 0], minlength=n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    return Graph(n, edges, indptr, np.ascontiguousarray(both[:, 1]), degrees)


def from_edge_list(pairs: Iterable[Tuple[int, int]] | np.ndarray,
                   n_hint: int | None = None) -> Graph:
    """Build a Graph from raw (i, j) pairs.

    Self-loops are dropped, duplicates and orientations merged. The node
    count is max id + 1, or ``n_hint`` if that is larger.

    Raises:
        ValueError: if any node id is negative.
    """
    arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                     dtype=np.int64).reshape(-1, 2)
    if arr.size and arr.min() < 0:
        raise ValueError("node ids must be non-negative")
    n = int(arr.max()) + 1 if arr.size else 0
    if n_hint is not None:
        n = max(n, int(n_hint))
    if arr.size == 0:
        return _build(n, np.empty((0, 2), dtype=np.int64))
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    lo, hi = lo[keep], hi[keep]
    keys = np.unique(lo * np.int64(n) + hi)
    edges = np.stack([keys // n, keys % n], axis=1)
    return _build(n, edges)


def component_labels(g: Graph) -> np.ndarray:
    """Connected-component id per node; components numbered by discovery
    order when scanning seeds in ascending node id."""
    labels = np.full(g.n, -1, dtype=np.int64)
    comp = 0
    for seed in range(g.n):
        if labels[seed] >= 0:
            continue
        labels[seed] = comp
        frontier = np.array([seed], dtype=np.int64)
        while frontier.size:
            nxt = []
            for v in frontier:
                nbrs = g.neighbors(v)
                fresh = nbrs[labels[nbrs] < 0]
                if fresh.size:
                    labels[fresh] = comp
                    nxt.append(fresh)
            frontier = np.concatenate(nxt) if nxt else np.empty(0, dtype=np.int64)
        comp += 1
    return labels


def largest_connected_component(g: Graph) -> Tuple[Graph, np.ndarray]:
    """Induced sub-graph on the largest component, ids re-densified.

    Ties between equally sized components go to the one containing the
    smallest original node id. Returns (sub_graph, node_map) where
    ``node_map[local_id] = original_id``.
    """
    if g.n == 0:
        return g, np.empty(0, dtype=np.int64)
    labels = component_labels(g)
    sizes = np.bincount(labels)
    # discovery order makes argmax's first-occurrence rule pick the
    # component with the smallest minimum original id on ties
    winner = int(np.argmax(sizes))
    keep = np.flatnonzero(labels == winner)
    sub = induced_subgraph(g, keep)
    return sub, keep


def induced_subgraph(g: Graph, nodes: np.ndarray) -> Graph:
    """Induced sub-graph on ``nodes``; local id = rank in ascending order.

    ``nodes`` must contain distinct ids. Every parent edge with both
    endpoints in ``nodes`` is kept.
    """
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    ns = nodes.shape[0]
    lookup = np.full(g.n, -1, dtype=np.int64)
    lookup[nodes] = np.arange(ns, dtype=np.int64)
    if g.m == 0 or ns == 0:
        return _build(ns, np.empty((0, 2), dtype=np.int64))
    rows = np.repeat(nodes, g.degrees[nodes])
    cols = _slice_indices(g, nodes)
    lr = lookup[rows]
    lc = lookup[cols]
    keep = (lc >= 0) & (lr < lc)
    edges = np.stack([lr[keep], lc[keep]], axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return _build(ns, edges[order])


def _slice_indices(g: Graph, nodes: np.ndarray) -> np.ndarray:
    """Concatenate neighbor lists of ``nodes`` (ascending)."""
    counts = g.degrees[nodes]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = g.indptr[nodes]
    # per-element source index: each node's slice start plus an offset
    # running 0..count-1 within the slice
    offsets = np.arange(total, dtype=np.int64)
    slice_begin = np.concatenate([[0], np.cumsum(counts)[:-1]])
    offsets -= np.repeat(slice_begin, counts)
    return g.indices[np.repeat(starts, counts) + offsets]


def read_edge_list(path: str) -> Graph:
    """Parse a whitespace-separated edge-list text file.

    One edge per line, two non-negative integers; lines starting with
    '#' or '%' are ignored.
    """
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line[0] in "#%":
                continue
            parts = line.split()
            pairs.append((int(parts[0]), int(parts[1])))
    return from_edge_list(pairs)


def write_edge_list(g: Graph, path: str) -> None:
    """Write the canonical edge list, one 'i j' pair per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def read_labels(path: str, n: int) -> np.ndarray:
    """Parse a 'node_id label' per-line file into a length-n int vector.

    Nodes absent from the file get label -1.
    """
    labels = np.full(n, -1, dtype=np.int64)
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line[0] in "#%":
                continue
            parts = line.split()
            idx = int(parts[0])
            if idx < 0 or idx >= n:
                raise ValueError(f"label file node id {idx} outside 0..{n - 1}")
            labels[idx] = int(parts[1])
    return labels


def write_labels(labels: np.ndarray, path: str) -> None:
    """Write a 'node_id label' per-line file."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, lab in enumerate(labels):
            fh.write(f"{i} {lab}\n")


@dataclass(frozen=True)
class SubGraph:
    """Induced sub-graph plus the mapping from local ids to parent ids.

    ``parent_ids`` is ascending, so local node u corresponds to parent
    node ``parent_ids[u]``. ``fill_used`` records whether a sampler had
    to fall back to uniform node fill to reach the target size.
    """

    graph: Graph
    parent_ids: np.ndarray
    fill_used: bool = False

    @property
    def n(self) -> int:
        return self.graph.n


def take_subgraph(g: Graph, nodes: np.ndarray, fill_used: bool = False) -> SubGraph:
    """Package a node set as a SubGraph (applies the induced-edge step)."""
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    return SubGraph(graph=induced_subgraph(g, nodes), parent_ids=nodes,
                    fill_used=fill_used)
