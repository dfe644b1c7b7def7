"""Divide-and-conquer community detection.

Pipeline: draw B sub-graphs, run a greedy modularity detector on each,
count for every node pair how often the two nodes were sampled together
(N_ij) and how often they were co-assigned, threshold N_ij at its 40th
percentile, average the co-assignments into a pairwise estimate, and
read final labels off the estimate's rows with k-means.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .graph import Graph, SubGraph
from .rngs import Seed, as_rng, derive_rng
from .sampling import sample

# above this node count the pairwise estimate is clustered in sparse form
DENSE_MATRIX_NODE_CAP = 20_000

_COMPACT_PENDING_LIMIT = 8_000_000

# up to this node count pair counters live in flat n^2 arrays (<= 34 MB);
# larger graphs use the chunked sparse path
_DENSE_COUNTER_NODE_CAP = 2048


def _triu_pairs(s: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cached strict-upper-triangle index pair for an s x s block."""
    cached = _TRIU_CACHE.get(s)
    if cached is None:
        cached = np.triu_indices(s, k=1)
        for arr in cached:
            arr.flags.writeable = False
        if len(_TRIU_CACHE) >= 8:
            _TRIU_CACHE.clear()
        _TRIU_CACHE[s] = cached
    return cached


_TRIU_CACHE: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def detect_communities_greedy(g: Graph, k: int) -> np.ndarray:
    """Agglomerative modularity maximization cut at exactly k clusters.

    Starting from singletons, repeatedly merges the connected cluster
    pair with the largest modularity gain until k clusters remain.
    When only mutually disconnected clusters are left, the pair with
    the largest (least negative) gain is merged regardless, so the cut
    at exactly k always succeeds. Returns labels in 1..k, numbered by
    each cluster's smallest node id.

    Edgeless graphs carry no merge information; nodes are assigned
    round-robin by id to k balanced groups.

    Raises:
        ValueError: if k is outside 1..n.
    """
    n = g.n
    if not 1 <= k <= n:
        raise ValueError(f"cluster count must be in 1..{n}, got {k}")
    if g.m == 0:
        return (np.arange(n, dtype=np.int64) % k) + 1
    m = float(g.m)
    w = np.zeros((n, n), dtype=np.float64)
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    w[e0, e1] = 1.0
    w[e1, e0] = 1.0
    a = g.degrees.astype(np.float64) / (2.0 * m)
    active = np.ones(n, dtype=bool)
    parent = np.arange(n, dtype=np.int64)
    n_active = n
    neg_inf = -np.inf
    # gain[x, y] = merge gain for connected active pairs, -inf elsewhere;
    # a merge only touches row/col i, so updates are O(n) per step.
    # row_best holds per-row upper bounds on the gains, fixed lazily at
    # selection time, so each step scans O(n) values instead of n^2.
    gain = w / m - 2.0 * np.outer(a, a)
    gain[w == 0] = neg_inf
    np.fill_diagonal(gain, neg_inf)
    row_best = gain.max(axis=1)
    connected_phase = True
    while n_active > k:
        if connected_phase:
            while True:
                i = int(np.argmax(row_best))
                j = int(np.argmax(gain[i]))
                true_max = gain[i, j]
                if true_max < row_best[i]:
                    # stale upper bound: tighten and rescan
                    row_best[i] = true_max
                    continue
                break
            if true_max == neg_inf:
                connected_phase = False
        if not connected_phase:
            # only mutually disconnected clusters remain: merge the pair
            # with the smallest modularity penalty
            forced = -2.0 * np.outer(a, a)
            amask = active[:, None] & active[None, :]
            np.fill_diagonal(amask, False)
            forced[~amask] = neg_inf
            flat = int(np.argmax(forced))
            i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        w[i, :] += w[j, :]
        w[:, i] += w[:, j]
        w[i, i] = 0.0
        w[j, :] = 0.0
        w[:, j] = 0.0
        a[i] += a[j]
        a[j] = 0.0
        active[j] = False
        parent[j] = i
        n_active -= 1
        gain[j, :] = neg_inf
        gain[:, j] = neg_inf
        row = w[i, :] / m - 2.0 * (a[i] * a)
        row[(w[i, :] == 0.0) | ~active] = neg_inf
        row[i] = neg_inf
        gain[i, :] = row
        gain[:, i] = row
        np.maximum(row_best, row, out=row_best)
        row_best[i] = row.max()
        row_best[j] = neg_inf
    root = parent.copy()
    for v in range(n):
        r = v
        while parent[r] != r:
            r = parent[r]
        root[v] = r
    labels = np.empty(n, dtype=np.int64)
    next_label = 1
    seen: Dict[int, int] = {}
    for v in range(n):
        r = int(root[v])
        if r not in seen:
            seen[r] = next_label
            next_label += 1
        labels[v] = seen[r]
    return labels


class ClusterAccumulator:
    """Sparse pairwise counters for the combination step.

    For each unordered node pair (i < j) it tracks N_ij, the number of
    sub-samples containing both nodes, and S_ij, the number of those in
    which the pair was co-assigned. Pairs are keyed as i*n + j; chunks
    of raw keys are buffered and compacted lazily so accumulation is a
    cheap vectorized append.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self.b_count = 0
        # flat n^2 counters are much faster when they fit in memory
        self._dense = 0 < self.n <= _DENSE_COUNTER_NODE_CAP
        if self._dense:
            self._co_dense = np.zeros(self.n * self.n, dtype=np.int32)
            self._same_dense = np.zeros(self.n * self.n, dtype=np.int32)
        self._keys = np.empty(0, dtype=np.int64)
        self._co = np.empty(0, dtype=np.int64)
        self._same = np.empty(0, dtype=np.int64)
        self._pending_co: List[np.ndarray] = []
        self._pending_same: List[np.ndarray] = []
        self._pending_size = 0

    def add(self, parent_ids: np.ndarray, labels: np.ndarray) -> None:
        """Record one sub-sample given its parent ids and local labels."""
        parent_ids = np.asarray(parent_ids, dtype=np.int64)
        labels = np.asarray(labels)
        if labels.shape[0] != parent_ids.shape[0]:
            raise ValueError("labels must match the sub-sample size")
        s = parent_ids.shape[0]
        self.b_count += 1
        if s < 2:
            return
        iu, ju = _triu_pairs(s)
        lo = np.minimum(parent_ids[iu], parent_ids[ju])
        hi = np.maximum(parent_ids[iu], parent_ids[ju])
        keys = lo * np.int64(self.n) + hi
        same = labels[iu] == labels[ju]
        if self._dense:
            # keys within one sub-sample are distinct, so fancy-index
            # increments touch each slot once
            self._co_dense[keys] += 1
            self._same_dense[keys[same]] += 1
            return
        self._pending_co.append(keys)
        self._pending_same.append(keys[same])
        self._pending_size += keys.shape[0]
        if self._pending_size > _COMPACT_PENDING_LIMIT:
            self._compact()

    def _compact(self) -> None:
        if not self._pending_co:
            return
        co_new, co_cnt = np.unique(np.concatenate(self._pending_co), return_counts=True)
        merged_keys = np.unique(np.concatenate([self._keys, co_new]))
        co = np.zeros(merged_keys.shape[0], dtype=np.int64)
        same = np.zeros(merged_keys.shape[0], dtype=np.int64)
        if self._keys.size:
            pos = np.searchsorted(merged_keys, self._keys)
            co[pos] += self._co
            same[pos] += self._same
        pos = np.searchsorted(merged_keys, co_new)
        co[pos] += co_cnt
        pending_same = [ch for ch in self._pending_same if ch.size]
        if pending_same:
            same_new, same_cnt = np.unique(np.concatenate(pending_same), return_counts=True)
            pos = np.searchsorted(merged_keys, same_new)
            same[pos] += same_cnt
        self._keys, self._co, self._same = merged_keys, co, same
        self._pending_co = []
        self._pending_same = []
        self._pending_size = 0

    def pair_counts(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(keys, N_ij, S_ij) over pairs with N_ij > 0, keys ascending."""
        if self._dense:
            keys = np.flatnonzero(self._co_dense)
            return (keys, self._co_dense[keys].astype(np.int64),
                    self._same_dense[keys].astype(np.int64))
        self._compact()
        return self._keys, self._co, self._same

    def merge(self, other: "ClusterAccumulator") -> "ClusterAccumulator":
        """Fold another accumulator into this one (order-independent)."""
        if other.n != self.n:
            raise ValueError("accumulators must share the node count")
        keys, co, same = other.pair_counts()
        self.b_count += other.b_count
        if self._dense:
            self._co_dense[keys] += co.astype(np.int32)
            self._same_dense[keys] += same.astype(np.int32)
            return self
        self._pending_co.append(np.repeat(keys, co))
        self._pending_same.append(np.repeat(keys, same))
        self._pending_size += int(co.sum())
        self._compact()
        return self


@dataclass(frozen=True)
class ClusteringMatrixEstimate:
    """Sparse symmetric pairwise co-clustering estimate.

    ``keys`` holds i*n + j (i < j) for pairs whose sample count cleared
    the threshold ``beta``; ``values`` holds the co-assignment fractions
    in [0, 1]. Absent pairs are 0; the diagonal is 1 by convention.
    """

    n: int
    keys: np.ndarray
    values: np.ndarray
    beta: float

    def to_dense(self) -> np.ndarray:
        """Materialize the full n x n matrix (diagonal 1)."""
        out = np.zeros((self.n, self.n), dtype=np.float64)
        i = self.keys // self.n
        j = self.keys % self.n
        out[i, j] = self.values
        out[j, i] = self.values
        np.fill_diagonal(out, 1.0)
        return out

    def to_sparse(self):
        """Materialize as a scipy CSR matrix (diagonal 1)."""
        from scipy import sparse

        i = self.keys // self.n
        j = self.keys % self.n
        diag = np.arange(self.n, dtype=np.int64)
        rows = np.concatenate([i, j, diag])
        cols = np.concatenate([j, i, diag])
        vals = np.concatenate([self.values, self.values, np.ones(self.n)])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))


def accumulate(acc: ClusterAccumulator, sub: SubGraph,
               labels: np.ndarray) -> ClusterAccumulator:
    """Record a sub-sample's labeling into the accumulator."""
    acc.add(sub.parent_ids, labels)
    return acc


def choose_beta(acc: ClusterAccumulator) -> float:
    """Nearest-rank 40th percentile of the positive pair counts N_ij.

    Raises:
        ValueError: if no pair has been observed.
    """
    _, co, _ = acc.pair_counts()
    if co.size == 0:
        raise ValueError("no observed pairs; cannot choose a threshold")
    rank = int(np.ceil(0.4 * co.size))
    rank = max(rank, 1)
    return float(np.partition(co, rank - 1)[rank - 1])


def combine(acc: ClusterAccumulator, beta: float) -> ClusteringMatrixEstimate:
    """Average co-assignments over pairs with N_ij > beta."""
    keys, co, same = acc.pair_counts()
    mask = co > beta
    values = same[mask].astype(np.float64) / co[mask].astype(np.float64)
    return ClusteringMatrixEstimate(n=acc.n, keys=keys[mask], values=values,
                                    beta=float(beta))


def extract_labels_kmeans(est: ClusteringMatrixEstimate, k: int, seed: Seed,
                          restarts: int = 10, max_iter: int = 100,
                          dense_cap: int = DENSE_MATRIX_NODE_CAP) -> np.ndarray:
    """Cluster the estimate's rows into k groups; labels in 1..k.

    Runs k-means++ with ``restarts`` restarts and keeps the lowest
    within-cluster sum of squares (ties go to the earliest restart).
    Rows are dense up to ``dense_cap`` nodes and sparse beyond.

    Raises:
        ValueError: if k is outside 1..n.
    """
    if not 1 <= k <= est.n:
        raise ValueError(f"cluster count must be in 1..{est.n}, got {k}")
    x = est.to_dense() if est.n <= dense_cap else est.to_sparse()
    rng = as_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=restarts)
    best_labels = None
    best_wcss = np.inf
    for r in range(restarts):
        labels, wcss = _kmeans_once(x, k, derive_rng(int(seeds[r])), max_iter)
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return best_labels + 1


def _row_sqnorms(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return np.einsum("ij,ij->i", x, x)
    return np.asarray(x.multiply(x).sum(axis=1)).ravel()


def _kmeans_once(x, k: int, rng: np.random.Generator,
                 max_iter: int) -> Tuple[np.ndarray, float]:
    """One k-means run (k-means++ init, Lloyd iterations)."""
    n = x.shape[0]
    x2 = _row_sqnorms(x)
    centers = _kmeanspp_init(x, x2, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = _dist2(x, x2, centers)
        new_labels = np.argmin(d2, axis=1)
        # re-seed empty clusters with the worst-fit point
        assigned = d2[np.arange(n), new_labels]
        for c in range(k):
            if not np.any(new_labels == c):
                far = int(np.argmax(assigned))
                new_labels[far] = c
                assigned[far] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centers = _update_centers(x, labels, k, centers)
    d2 = _dist2(x, x2, centers)
    wcss = float(d2[np.arange(n), labels].sum())
    return labels, wcss


def _kmeanspp_init(x, x2: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = _row_dense(x, first)
    closest = _dist2(x, x2, centers[:1]).ravel()
    for c in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            # fewer distinct rows than centers: any uncovered choice is as good
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[c] = _row_dense(x, idx)
        d = _dist2(x, x2, centers[c:c + 1]).ravel()
        closest = np.minimum(closest, d)
    return centers


def _row_dense(x, i: int) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x[i].astype(np.float64, copy=True)
    return np.asarray(x.getrow(i).todense()).ravel()


def _dist2(x, x2: np.ndarray, centers: np.ndarray) -> np.ndarray:
    c2 = np.einsum("ij,ij->i", centers, centers)
    cross = x @ centers.T
    if not isinstance(cross, np.ndarray):
        cross = np.asarray(cross.todense()) if hasattr(cross, "todense") else np.asarray(cross)
    d2 = x2[:, None] + c2[None, :] - 2.0 * cross
    np.maximum(d2, 0.0, out=d2)
    return d2


def _update_centers(x, labels: np.ndarray, k: int, old: np.ndarray) -> np.ndarray:
    centers = old.copy()
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    if isinstance(x, np.ndarray):
        sums = np.zeros((k, x.shape[1]), dtype=np.float64)
        for c in range(k):
            mask = labels == c
            if mask.any():
                sums[c] = x[mask].sum(axis=0)
    else:
        from scipy import sparse

        onehot = sparse.csr_matrix(
            (np.ones(labels.shape[0]), (labels, np.arange(labels.shape[0]))),
            shape=(k, labels.shape[0]))
        sums = np.asarray((onehot @ x).todense())
    nonempty = counts > 0
    centers[nonempty] = sums[nonempty] / counts[nonempty, None]
    return centers


@dataclass(frozen=True)
class PaceResult:
    """Labels plus coverage diagnostics from the divide-and-conquer run."""

    labels: np.ndarray
    estimate: ClusteringMatrixEstimate
    beta: float
    diagnostics: Dict[str, float] = field(default_factory=dict)


def run_pace(g: Graph, k: int, q: float, b: int, scheme: str, seed: int,
             dense_cap: int = DENSE_MATRIX_NODE_CAP) -> PaceResult:
    """Full divide-and-conquer community pipeline.

    Draws ``b`` sub-graphs of round(q*n) nodes (at least 2), detects
    communities on each with the greedy detector, combines the pairwise
    co-assignments, and extracts final labels via k-means.

    The combination threshold is the 40th percentile of positive pair
    counts, capped at max(N_ij) - 1 so the estimate is never empty (the
    percentile equals the maximum when sampling is near-exhaustive, and
    an empty estimate would leave k-means nothing to cluster).

    Raises:
        ValueError: for b < 1 or q outside (0, 1].
    """
    if b < 1:
        raise ValueError("need at least one sub-sample")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    target = max(2, min(g.n, int(np.floor(q * g.n + 0.5))))
    acc = ClusterAccumulator(g.n)
    for idx in range(b):
        sub = sample(g, scheme, target, (seed, idx))
        k_local = min(k, sub.n)
        labels = detect_communities_greedy(sub.graph, k_local)
        accumulate(acc, sub, labels)
    beta_raw = choose_beta(acc)
    _, co, _ = acc.pair_counts()
    beta = min(beta_raw, float(co.max() - 1))
    est = combine(acc, beta)
    labels = extract_labels_kmeans(est, k, (seed, b), dense_cap=dense_cap)
    pos = co[co > 0]
    total_pairs = g.n * (g.n - 1) // 2
    diagnostics = {
        "beta_raw": float(beta_raw),
        "beta": float(beta),
        "min_pair_count": float(pos.min()),
        "median_pair_count": float(np.median(pos)),
        "frac_pairs_at_or_below_beta": float(
            1.0 - np.count_nonzero(co > beta) / total_pairs) if total_pairs else 0.0,
    }
    return PaceResult(labels=labels, estimate=est, beta=beta, diagnostics=diagnostics)
