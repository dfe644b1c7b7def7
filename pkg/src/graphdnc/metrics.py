"""Evaluation metrics: ARI, AUC, modularity, Jaccard, mis-clustering rates."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def ari(a: np.ndarray, b: np.ndarray) -> float:
    """Adjusted Rand index between two labelings (contingency-table form).

    Invariant under permuting label names; 1.0 for identical partitions.
    Degenerate pairs (both partitions trivial) return 1.0.

    Raises:
        ValueError: on length mismatch.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("label vectors must be 1-d and of equal length")
    n = a.shape[0]
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ka = int(ai.max()) + 1 if n else 0
    kb = int(bi.max()) + 1 if n else 0
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x: np.ndarray) -> np.ndarray:
        return x * (x - 1) // 2

    index = int(comb2(table).sum())
    sum_a = int(comb2(table.sum(axis=1)).sum())
    sum_b = int(comb2(table.sum(axis=0)).sum())
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    # (index - sa*sb/T) / ((sa+sb)/2 - sa*sb/T), scaled by 2T so both
    # sides are exact integers and the single division rounds correctly
    num = 2 * (total * index - sum_a * sum_b)
    den = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if den == 0:
        return 1.0
    return num / den


def auc(scores: np.ndarray, truth: np.ndarray) -> float:
    """Mann-Whitney AUC of scores against binary truth; ties count 1/2.

    Equals the probability that a uniformly random positive node
    receives a higher score than a uniformly random negative node.

    Raises:
        ValueError: if truth is not binary with both classes present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth)
    if scores.shape != truth.shape or scores.ndim != 1:
        raise ValueError("scores and truth must be 1-d and of equal length")
    pos = truth == 1
    neg = truth == 0
    n1 = int(pos.sum())
    n0 = int(neg.sum())
    if n1 + n0 != truth.shape[0]:
        raise ValueError("truth must contain only 0/1 labels")
    if n1 == 0 or n0 == 0:
        raise ValueError("truth must contain both classes")
    ranks = _midranks(scores)
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def _midranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the group midrank."""
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    n = x.shape[0]
    boundaries = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1], True])
    ranks_sorted = np.empty(n, dtype=np.float64)
    for s, e in zip(boundaries[:-1], boundaries[1:]):
        ranks_sorted[s:e] = (s + e + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = ranks_sorted
    return ranks


def modularity(g: Graph, labels: np.ndarray) -> float:
    """Newman modularity Q of a node partition.

    Q = sum over clusters of [m_c/m - (d_c/2m)^2] with m_c the
    intra-cluster edge count and d_c the cluster's total degree.

    Raises:
        ValueError: if the graph has no edges or label length mismatches.
    """
    labels = np.asarray(labels)
    if labels.shape[0] != g.n:
        raise ValueError("labels must have one entry per node")
    if g.m == 0:
        raise ValueError("modularity undefined on an edgeless graph")
    _, inv = np.unique(labels, return_inverse=True)
    k = int(inv.max()) + 1
    m = g.m
    lu = inv[g.edges[:, 0]]
    lv = inv[g.edges[:, 1]]
    intra = np.bincount(lu[lu == lv], minlength=k).astype(np.float64)
    dtot = np.bincount(inv, weights=g.degrees.astype(np.float64), minlength=k)
    return float(np.sum(intra / m - (dtot / (2.0 * m)) ** 2))


def jaccard(core_a, core_b) -> float:
    """Jaccard coefficient |A & B| / |A | B| of two node sets.

    Raises:
        ValueError: if both sets are empty.
    """
    sa = set(int(x) for x in core_a)
    sb = set(int(x) for x in core_b)
    union = sa | sb
    if not union:
        raise ValueError("jaccard undefined for two empty sets")
    return len(sa & sb) / len(union)


def misclustering_cp(c_hat: np.ndarray, c_star: np.ndarray) -> float:
    """Mean squared deviation (1/n) * ||c_hat - c_star||^2.

    Raises:
        ValueError: on length mismatch.
    """
    c_hat = np.asarray(c_hat, dtype=np.float64)
    c_star = np.asarray(c_star, dtype=np.float64)
    if c_hat.shape != c_star.shape or c_hat.ndim != 1:
        raise ValueError("vectors must be 1-d and of equal length")
    diff = c_hat - c_star
    return float(diff @ diff / c_hat.shape[0])


def misclustering_pace(c_matrix_est, truth: np.ndarray) -> float:
    """Squared Frobenius distance between the estimated and true
    clustering matrices, divided by n^2.

    The true matrix has entry 1 iff two nodes share a community. Both
    matrices take diagonal 1 by convention, so the diagonal cancels;
    absent estimate entries count as 0.

    Raises:
        ValueError: on dimension mismatch.
    """
    truth = np.asarray(truth)
    n = c_matrix_est.n
    if truth.shape[0] != n:
        raise ValueError("truth length must match estimate dimension")
    keys = c_matrix_est.keys
    values = c_matrix_est.values
    i = keys // n
    j = keys % n
    same = (truth[i] == truth[j]).astype(np.float64)
    covered = float(np.sum((same - values) ** 2))
    _, counts = np.unique(truth, return_counts=True)
    same_pairs_total = int(np.sum(counts * (counts - 1) // 2))
    uncovered_same = same_pairs_total - int(same.sum())
    # unordered pairs contribute twice to the Frobenius norm
    return 2.0 * (covered + uncovered_same) / float(n) ** 2
