"""Core-periphery correlation, greedy optimizer, sweep binarization, pipeline."""

import itertools

import numpy as np
import pytest

import graphdnc as gd
from graphdnc.coreperiphery import (CoreScore, be_metric, binarize_by_sweep,
                                    optimize_core_labels, run_cp)
from graphdnc.sampling import sample

from test_graph import random_graph


def ideal_cp_graph(n, k):
    """Graph that is exactly the ideal core-periphery pattern."""
    edges = [(i, j) for i in range(k) for j in range(i + 1, n)]
    return gd.from_edge_list(edges, n_hint=n)


def naive_pearson(g, labels):
    """Correlation via np.corrcoef over the explicit pair vectors."""
    n = g.n
    a = np.zeros((n, n))
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    a[e0, e1] = 1.0
    a[e1, e0] = 1.0
    iu, ju = np.triu_indices(n, k=1)
    core = np.asarray(labels).astype(bool)
    pattern = (core[iu] | core[ju]).astype(float)
    return float(np.corrcoef(a[iu, ju], pattern)[0, 1])


def _nondegenerate_instance(rng, n_max=30):
    while True:
        n = int(rng.integers(4, n_max + 1))
        g = random_graph(n, float(rng.uniform(0.1, 0.9)),
                         int(rng.integers(0, 100_000)))
        t = n * (n - 1) // 2
        if 0 < g.m < t:
            return g


def test_be_metric_matches_dense_pearson():
    rng = np.random.default_rng(0)
    for _ in range(40):
        g = _nondegenerate_instance(rng)
        k = int(rng.integers(1, g.n - 1))
        labels = np.zeros(g.n, dtype=np.int64)
        labels[rng.choice(g.n, size=k, replace=False)] = 1
        got = be_metric(g, labels)
        ref = naive_pearson(g, labels)
        assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def test_be_metric_perfect_on_planted_pattern():
    for n, k in ((5, 1), (8, 3), (20, 6), (40, 10)):
        g = ideal_cp_graph(n, k)
        labels = np.array([1] * k + [0] * (n - k))
        assert be_metric(g, labels) == 1.0


def test_be_metric_validation():
    g = random_graph(6, 0.5, 1)
    with pytest.raises(ValueError):
        be_metric(g, np.zeros(5, dtype=np.int64))
    with pytest.raises(ValueError):
        be_metric(g, np.array([0, 1, 2, 0, 1, 0]))
    with pytest.raises(ValueError):
        be_metric(g, np.zeros(6, dtype=np.int64))  # empty core
    with pytest.raises(ValueError):
        be_metric(g, np.ones(6, dtype=np.int64))  # empty periphery
    edgeless = gd.from_edge_list([], n_hint=4)
    with pytest.raises(ValueError):
        be_metric(edgeless, np.array([1, 0, 0, 0]))


def _all_single_flips(labels):
    for v in range(labels.shape[0]):
        flipped = labels.copy()
        flipped[v] = 1 - flipped[v]
        yield flipped


def test_optimizer_is_single_flip_optimal():
    rng = np.random.default_rng(2)
    for _ in range(30):
        g = _nondegenerate_instance(rng, n_max=25)
        labels = optimize_core_labels(g)
        rho = be_metric(g, labels)
        for flipped in _all_single_flips(labels):
            k = int(flipped.sum())
            if k == 0 or k == g.n:
                continue
            try:
                flipped_rho = be_metric(g, flipped)
            except ValueError:
                continue  # constant ideal pattern (k = n-1): no valid flip
            assert flipped_rho <= rho


def test_optimizer_near_exhaustive_optimum_small_n():
    rng = np.random.default_rng(3)
    for _ in range(25):
        g = _nondegenerate_instance(rng, n_max=9)
        rho = be_metric(g, optimize_core_labels(g))
        best = -np.inf
        for k in range(1, g.n - 1):  # k = n-1 has a constant ideal pattern
            for core in itertools.combinations(range(g.n), k):
                labels = np.zeros(g.n, dtype=np.int64)
                labels[list(core)] = 1
                best = max(best, be_metric(g, labels))
        assert rho >= best - 0.02


def test_optimizer_finds_planted_core():
    g = ideal_cp_graph(16, 4)
    labels = optimize_core_labels(g)
    assert labels.tolist() == [1] * 4 + [0] * 12
    assert be_metric(g, labels) == 1.0


def test_optimizer_deterministic_and_seed_ignored():
    g = random_graph(25, 0.3, 7)
    a = optimize_core_labels(g)
    assert np.array_equal(a, optimize_core_labels(g))
    assert np.array_equal(a, optimize_core_labels(g, seed=12345))


def test_optimizer_rejects_degenerate_graphs():
    with pytest.raises(ValueError):
        optimize_core_labels(gd.from_edge_list([], n_hint=5))
    complete = gd.from_edge_list(
        [(i, j) for i in range(5) for j in range(i + 1, 5)])
    with pytest.raises(ValueError):
        optimize_core_labels(complete)


def naive_sweep(g, scores):
    n = g.n
    order = np.lexsort((np.arange(n), -g.degrees.astype(np.float64),
                        -np.asarray(scores, dtype=np.float64)))
    best_rho, best_k = -np.inf, None
    for k in range(1, n):
        labels = np.zeros(n, dtype=np.int64)
        labels[order[:k]] = 1
        try:
            rho = be_metric(g, labels)
        except ValueError:
            continue
        if rho > best_rho:
            best_rho, best_k = rho, k
    labels = np.zeros(n, dtype=np.int64)
    labels[order[:best_k]] = 1
    return labels, best_k, best_rho


def test_sweep_matches_per_prefix_evaluation():
    rng = np.random.default_rng(4)
    for _ in range(30):
        g = _nondegenerate_instance(rng, n_max=25)
        scores = rng.random(g.n)
        if rng.random() < 0.5:
            scores = np.round(scores, 1)  # force score ties
        got = binarize_by_sweep(g, scores)
        labels, k, rho = naive_sweep(g, scores)
        assert np.array_equal(got.labels, labels)
        assert got.k == k
        assert got.rho == rho


def test_sweep_tie_breaks_by_degree_then_id():
    # star: equal scores put the hub first, and the hub alone is the
    # exact ideal pattern
    star = gd.from_edge_list([(0, j) for j in range(1, 6)])
    res = binarize_by_sweep(star, np.full(6, 0.5))
    assert res.labels.tolist() == [1, 0, 0, 0, 0, 0]
    assert res.k == 1
    assert res.rho == 1.0

    # path 0-1-2 with all ties: order is node 1 (degree 2) then 0 then 2
    path = gd.from_edge_list([(0, 1), (1, 2)])
    res = binarize_by_sweep(path, np.zeros(3))
    assert res.labels[1] == 1


def test_sweep_prefers_smallest_core_on_rho_ties():
    # two disjoint edges: cores {a} and {a, b-from-other-edge} can tie;
    # the reported k must match the first maximum of the naive sweep
    g = gd.from_edge_list([(0, 1), (2, 3)])
    scores = np.array([0.9, 0.1, 0.9, 0.1])
    got = binarize_by_sweep(g, scores)
    _, k, rho = naive_sweep(g, scores)
    assert got.k == k
    assert got.rho == rho


def test_sweep_validation():
    g = random_graph(6, 0.5, 5)
    with pytest.raises(ValueError):
        binarize_by_sweep(g, np.zeros(5))
    with pytest.raises(ValueError):
        binarize_by_sweep(gd.from_edge_list([], n_hint=4), np.zeros(4))
    complete = gd.from_edge_list(
        [(i, j) for i in range(4) for j in range(i + 1, 4)])
    with pytest.raises(ValueError):
        binarize_by_sweep(complete, np.zeros(4))


def test_run_cp_scores_are_count_fractions():
    g = ideal_cp_graph(40, 8)
    res = run_cp(g, 0.5, 12, "rn", 7)
    assert isinstance(res, CoreScore)
    assert res.b == 12
    assert np.array_equal(res.c_hat, res.x / 12.0)
    assert np.all((res.x >= 0) & (res.x <= 12))
    assert res.x.sum() > 0


def test_run_cp_matches_manual_trace():
    g = ideal_cp_graph(30, 6)
    q, b, scheme, seed = 0.4, 10, "re", 11
    res = run_cp(g, q, b, scheme, seed)

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
    assert np.array_equal(res.x, x)
    assert res.errors == errors


def test_run_cp_counts_undefined_subsamples_as_errors():
    # one edge in a sea of isolated nodes: most small draws are edgeless
    g = gd.from_edge_list([(0, 1)], n_hint=40)
    res = run_cp(g, 0.1, 30, "rn", 3)
    assert res.errors > 0
    assert res.b == 30
    assert np.all(res.c_hat <= 1.0)


def test_run_cp_deterministic_and_validated():
    g = random_graph(30, 0.2, 9)
    a = run_cp(g, 0.5, 8, "rw", 2)
    assert np.array_equal(a.x, run_cp(g, 0.5, 8, "rw", 2).x)
    with pytest.raises(ValueError):
        run_cp(g, 0.5, 0, "rn", 0)
    with pytest.raises(ValueError):
        run_cp(g, 0.0, 5, "rn", 0)
    with pytest.raises(ValueError):
        run_cp(g, 1.5, 5, "rn", 0)


def test_pipeline_recovers_planted_core():
    g = ideal_cp_graph(50, 10)
    res = run_cp(g, 0.6, 40, "rn", 1)
    sweep = binarize_by_sweep(g, res.c_hat)
    truth = np.array([1] * 10 + [0] * 40)
    assert np.array_equal(sweep.labels, truth)
