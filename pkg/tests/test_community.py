"""Greedy detector, pair accumulator, combination, k-means, full pipeline."""

import numpy as np
import pytest

import graphdnc as gd
from graphdnc import community as cm
from graphdnc.community import (ClusterAccumulator, ClusteringMatrixEstimate,
                                accumulate, choose_beta, combine,
                                detect_communities_greedy,
                                extract_labels_kmeans, run_pace)
from graphdnc.generators import SbmSpec, generate_sbm
from graphdnc.metrics import ari

from test_graph import random_graph


def naive_greedy_reference(g, k):
    """Dense agglomerative modularity maximization, full-matrix argmax.

    Independent O(n^3) re-implementation used as the behavioral oracle:
    same gain definition, same row-major tie-breaking, same forced
    merges for disconnected remainders, same label numbering.
    """
    n = g.n
    if g.m == 0:
        return (np.arange(n, dtype=np.int64) % k) + 1
    m = float(g.m)
    w = np.zeros((n, n))
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    w[e0, e1] = 1.0
    w[e1, e0] = 1.0
    a = g.degrees.astype(float) / (2 * m)
    active = np.ones(n, bool)
    parent = np.arange(n)
    n_active = n
    gain = w / m - 2.0 * np.outer(a, a)
    gain[w == 0] = -np.inf
    np.fill_diagonal(gain, -np.inf)
    while n_active > k:
        flat = int(np.argmax(gain))
        i, j = divmod(flat, n)
        if gain[i, j] == -np.inf:
            forced = -2.0 * np.outer(a, a)
            mask = active[:, None] & active[None, :]
            np.fill_diagonal(mask, False)
            forced[~mask] = -np.inf
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
        gain[j, :] = -np.inf
        gain[:, j] = -np.inf
        row = w[i, :] / m - 2.0 * (a[i] * a)
        row[(w[i, :] == 0.0) | ~active] = -np.inf
        row[i] = -np.inf
        gain[i, :] = row
        gain[:, i] = row
    root = parent.copy()
    for v in range(n):
        r = v
        while parent[r] != r:
            r = parent[r]
        root[v] = r
    labels = np.empty(n, np.int64)
    nxt = 1
    seen = {}
    for v in range(n):
        r = int(root[v])
        if r not in seen:
            seen[r] = nxt
            nxt += 1
        labels[v] = seen[r]
    return labels


def test_detect_validation():
    g = random_graph(6, 0.5, 0)
    with pytest.raises(ValueError):
        detect_communities_greedy(g, 0)
    with pytest.raises(ValueError):
        detect_communities_greedy(g, 7)


def test_detect_edgeless_round_robin():
    g = gd.from_edge_list([], n_hint=5)
    assert detect_communities_greedy(g, 2).tolist() == [1, 2, 1, 2, 1]
    assert detect_communities_greedy(g, 5).tolist() == [1, 2, 3, 4, 5]


def test_detect_two_triangles():
    g = gd.from_edge_list([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert detect_communities_greedy(g, 2).tolist() == [1, 1, 1, 2, 2, 2]


def test_detect_single_cluster():
    g = gd.from_edge_list([(i, j) for i in range(4) for j in range(i + 1, 4)])
    assert detect_communities_greedy(g, 1).tolist() == [1, 1, 1, 1]


def test_detect_cliques_with_bridge():
    clique = lambda nodes: [(a, b) for i, a in enumerate(nodes)
                            for b in nodes[i + 1:]]
    g = gd.from_edge_list(clique(range(5)) + clique(range(5, 10)) + [(4, 5)])
    labels = detect_communities_greedy(g, 2)
    assert labels.tolist() == [1] * 5 + [2] * 5


def test_detect_all_singletons():
    g = random_graph(7, 0.4, 1)
    assert detect_communities_greedy(g, 7).tolist() == list(range(1, 8))


def test_detect_merges_disconnected_components_when_forced():
    g = gd.from_edge_list([(0, 1), (2, 3), (4, 5)])
    labels = detect_communities_greedy(g, 2)
    assert set(labels.tolist()) == {1, 2}
    # pairs stay intact; exactly two of the three are merged
    for lo in (0, 2, 4):
        assert labels[lo] == labels[lo + 1]


def test_detect_label_numbering_by_smallest_member():
    g = gd.from_edge_list([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    labels = detect_communities_greedy(g, 2)
    assert labels[0] == 1  # the cluster containing node 0 is label 1
    firsts = [int(labels[np.flatnonzero(labels == c)[0]])
              for c in (1, 2)]
    assert firsts == [1, 2]


def test_detect_matches_naive_reference():
    rng = np.random.default_rng(7)
    for trial in range(60):
        n = int(rng.integers(3, 40))
        p = float(rng.uniform(0.05, 0.6))
        g = random_graph(n, p, int(rng.integers(0, 10_000)))
        k = int(rng.integers(1, n + 1))
        got = detect_communities_greedy(g, k)
        assert np.array_equal(got, naive_greedy_reference(g, k)), (n, p, k)


def test_accumulator_counts():
    acc = ClusterAccumulator(5)
    acc.add(np.array([0, 1, 2]), np.array([1, 1, 2]))
    acc.add(np.array([0, 1, 4]), np.array([1, 2, 2]))
    keys, co, same = acc.pair_counts()
    got = {int(k): (int(c), int(s)) for k, c, s in zip(keys, co, same)}
    assert got == {
        0 * 5 + 1: (2, 1),  # together twice, same once
        0 * 5 + 2: (1, 0),
        1 * 5 + 2: (1, 0),
        0 * 5 + 4: (1, 0),
        1 * 5 + 4: (1, 1),
    }
    assert acc.b_count == 2
    assert np.all(np.diff(keys) > 0)


def test_accumulator_tiny_or_empty_samples_count_toward_b():
    acc = ClusterAccumulator(4)
    acc.add(np.array([2]), np.array([1]))
    assert acc.b_count == 1
    assert acc.pair_counts()[0].size == 0


def test_accumulator_length_mismatch():
    acc = ClusterAccumulator(4)
    with pytest.raises(ValueError):
        acc.add(np.array([0, 1]), np.array([1]))


def _random_draws(rng, n, b):
    out = []
    for _ in range(b):
        s = int(rng.integers(1, n + 1))
        ids = rng.choice(n, size=s, replace=False)
        out.append((ids, rng.integers(1, 4, size=s)))
    return out


def test_accumulator_paths_agree():
    # the flat-array fast path and the chunked path must be
    # indistinguishable, including under forced early compaction
    rng = np.random.default_rng(3)
    for trial in range(20):
        n = int(rng.integers(5, 50))
        draws = _random_draws(rng, n, int(rng.integers(1, 10)))
        fast = ClusterAccumulator(n)
        chunked = ClusterAccumulator(n)
        chunked._dense = False
        for ids, labs in draws:
            fast.add(ids, labs)
            chunked.add(ids, labs)
        for x, y in zip(fast.pair_counts(), chunked.pair_counts()):
            assert np.array_equal(x, y)


def test_accumulator_early_compaction(monkeypatch):
    monkeypatch.setattr(cm, "_COMPACT_PENDING_LIMIT", 4)
    rng = np.random.default_rng(4)
    draws = _random_draws(rng, 12, 8)
    compacted = ClusterAccumulator(12)
    compacted._dense = False
    plain = ClusterAccumulator(12)
    for ids, labs in draws:
        compacted.add(ids, labs)
        plain.add(ids, labs)
    for x, y in zip(compacted.pair_counts(), plain.pair_counts()):
        assert np.array_equal(x, y)


def test_accumulator_merge_matches_sequential():
    rng = np.random.default_rng(5)
    n = 30
    parts_draws = [_random_draws(rng, n, 4) for _ in range(3)]
    whole = ClusterAccumulator(n)
    for i, draws in enumerate(parts_draws):
        acc = ClusterAccumulator(n)
        if i == 1:
            acc._dense = False
        for ids, labs in draws:
            acc.add(ids, labs)
        whole.merge(acc)
    ref = ClusterAccumulator(n)
    for draws in parts_draws:
        for ids, labs in draws:
            ref.add(ids, labs)
    for x, y in zip(whole.pair_counts(), ref.pair_counts()):
        assert np.array_equal(x, y)
    assert whole.b_count == ref.b_count
    with pytest.raises(ValueError):
        whole.merge(ClusterAccumulator(n + 1))


def _pair_acc(n, pair, co, same):
    acc = ClusterAccumulator(n)
    for i in range(co):
        labels = np.array([1, 1]) if i < same else np.array([1, 2])
        acc.add(np.array(pair), labels)
    return acc


def test_choose_beta_nearest_rank():
    acc = ClusterAccumulator(12)
    # five pairs with counts {1,2,3,4,5}: 40th percentile is the 2nd
    for count, pair in zip((1, 2, 3, 4, 5),
                           ((0, 1), (2, 3), (4, 5), (6, 7), (8, 9))):
        for _ in range(count):
            acc.add(np.array(pair), np.array([1, 1]))
    assert choose_beta(acc) == 2.0


def test_choose_beta_single_pair_and_empty():
    assert choose_beta(_pair_acc(4, (0, 1), 3, 3)) == 3.0
    with pytest.raises(ValueError):
        choose_beta(ClusterAccumulator(4))


def test_combine_thresholds_and_averages():
    n = 4
    always = _pair_acc(n, (0, 1), 10, 10)
    est = combine(always, 3.0)
    assert est.keys.tolist() == [0 * n + 1]
    assert est.values.tolist() == [1.0]

    rare = _pair_acc(n, (0, 1), 2, 2)
    assert combine(rare, 3.0).keys.size == 0

    mixed = _pair_acc(n, (0, 1), 8, 6)
    est = combine(mixed, 3.0)
    assert est.values.tolist() == [0.75]
    assert est.beta == 3.0


def test_combine_threshold_is_strict():
    est = combine(_pair_acc(4, (0, 1), 3, 3), 3.0)
    assert est.keys.size == 0  # N == beta is excluded


def test_estimate_dense_and_sparse_forms():
    est = ClusteringMatrixEstimate(
        n=3, keys=np.array([0 * 3 + 2]), values=np.array([0.5]), beta=0.0)
    dense = est.to_dense()
    expected = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.5, 0.0, 1.0]])
    assert np.array_equal(dense, expected)
    assert np.array_equal(est.to_sparse().toarray(), expected)


def test_accumulate_returns_accumulator():
    g = random_graph(8, 0.5, 2)
    sub = gd.sample(g, "rn", 4, 0)
    acc = ClusterAccumulator(8)
    out = accumulate(acc, sub, np.ones(4, dtype=np.int64))
    assert out is acc
    assert acc.b_count == 1


def _block_estimate(labels, same_val=1.0, diff_val=0.0, noise=0.0, seed=0):
    labels = np.asarray(labels)
    n = labels.shape[0]
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    values = np.where(same, same_val, diff_val).astype(float)
    if noise:
        values = np.clip(values + rng.uniform(-noise, noise, values.shape), 0, 1)
    keys = (iu * n + ju).astype(np.int64)
    return ClusteringMatrixEstimate(n=n, keys=keys, values=values, beta=0.0)


def test_kmeans_recovers_perfect_blocks():
    truth = np.repeat([0, 1, 2], (8, 6, 5))
    est = _block_estimate(truth)
    labels = extract_labels_kmeans(est, 3, seed=1)
    assert ari(labels, truth) == 1.0
    assert set(labels.tolist()) <= {1, 2, 3}


def test_kmeans_recovers_noisy_blocks():
    truth = np.repeat([0, 1], (20, 20))
    est = _block_estimate(truth, same_val=0.9, diff_val=0.1, noise=0.05, seed=3)
    labels = extract_labels_kmeans(est, 2, seed=2)
    assert ari(labels, truth) == 1.0


def test_kmeans_sparse_path_recovers_blocks():
    truth = np.repeat([0, 1], (10, 10))
    est = _block_estimate(truth)
    labels = extract_labels_kmeans(est, 2, seed=4, dense_cap=5)
    assert ari(labels, truth) == 1.0


def test_kmeans_deterministic_and_validated():
    truth = np.repeat([0, 1], (7, 7))
    est = _block_estimate(truth, same_val=0.8, diff_val=0.2, noise=0.1, seed=5)
    a = extract_labels_kmeans(est, 2, seed=9)
    b = extract_labels_kmeans(est, 2, seed=9)
    assert np.array_equal(a, b)
    assert extract_labels_kmeans(est, 1, seed=0).tolist() == [1] * 14
    with pytest.raises(ValueError):
        extract_labels_kmeans(est, 0, seed=0)
    with pytest.raises(ValueError):
        extract_labels_kmeans(est, 15, seed=0)


def test_kmeans_singleton_clusters_exact():
    est = _block_estimate(np.arange(5))
    labels = extract_labels_kmeans(est, 5, seed=0)
    assert sorted(labels.tolist()) == [1, 2, 3, 4, 5]


def test_run_pace_validation():
    g = random_graph(20, 0.4, 0)
    with pytest.raises(ValueError):
        run_pace(g, 2, 0.5, 0, "rn", 0)
    with pytest.raises(ValueError):
        run_pace(g, 2, 0.0, 5, "rn", 0)
    with pytest.raises(ValueError):
        run_pace(g, 2, 1.2, 5, "rn", 0)


def test_run_pace_full_sample_single_draw_is_base_detector():
    g = random_graph(60, 0.15, 8)
    res = run_pace(g, 3, 1.0, 1, "rn", 5)
    base = detect_communities_greedy(g, 3)
    # identical partition; cluster numbers may differ after k-means
    assert ari(res.labels, base) == 1.0
    assert res.beta == 0.0
    assert res.diagnostics["beta_raw"] == 1.0


def test_run_pace_deterministic():
    g = random_graph(50, 0.2, 9)
    a = run_pace(g, 2, 0.5, 20, "rn", 3)
    b = run_pace(g, 2, 0.5, 20, "rn", 3)
    assert np.array_equal(a.labels, b.labels)
    assert a.beta == b.beta


def test_run_pace_diagnostics_contract():
    g = random_graph(50, 0.2, 10)
    res = run_pace(g, 2, 0.4, 15, "re", 4)
    d = res.diagnostics
    assert set(d) == {"beta_raw", "beta", "min_pair_count",
                      "median_pair_count", "frac_pairs_at_or_below_beta"}
    assert d["beta"] <= d["beta_raw"]
    assert res.estimate.beta == res.beta
    assert 0.0 <= d["frac_pairs_at_or_below_beta"] <= 1.0
    assert d["min_pair_count"] >= 1.0


def test_run_pace_recovers_planted_blocks():
    spec = SbmSpec(n=500, block_sizes=(250, 250),
                   p=[[0.2, 0.01], [0.01, 0.2]])
    g, truth = generate_sbm(spec, 11)
    res = run_pace(g, 2, 0.25, 200, "rn", 3)
    assert ari(res.labels, truth) >= 0.9
