import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from estc.clustering import (Cluster, agnes, agnes_merge_trace, attach_titles,
                             cluster_prf, cosine_distances, kmeans, lloyd_labels,
                             silhouette)
from estc.catalog import TopicTitle


def unit(angle_deg: float) -> np.ndarray:
    rad = math.radians(angle_deg)
    return np.array([math.cos(rad), math.sin(rad)])


def brute_force_agnes(vectors, threshold, linkage):
    """Oracle: recompute every cluster-pair linkage from scratch each step."""
    matrix = np.asarray(vectors, dtype=float)
    norms = np.maximum(np.linalg.norm(matrix, axis=1), 1e-12)
    base = 1.0 - np.clip((matrix @ matrix.T) / np.outer(norms, norms), -1.0, 1.0)
    clusters = [[i] for i in range(len(matrix))]
    merges = []
    while len(clusters) > 1:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                cross = [base[i, j] for i in clusters[a] for j in clusters[b]]
                if linkage == "average":
                    dist = sum(cross) / len(cross)
                elif linkage == "complete":
                    dist = max(cross)
                else:
                    dist = min(cross)
                key = (dist, min(min(clusters[a]), min(clusters[b])),
                       max(min(clusters[a]), min(clusters[b])))
                if best is None or key < best[0]:
                    best = (key, a, b)
        (dist, _, _), a, b = best
        if dist > threshold:
            break
        left, right = sorted((clusters[a], clusters[b]), key=min)
        merges.append((frozenset(left), frozenset(right), dist))
        merged = clusters[a] + clusters[b]
        clusters = [c for i, c in enumerate(clusters) if i not in (a, b)] + [merged]
    return [sorted(c) for c in clusters], merges


def brute_force_silhouette(vectors, labels):
    """Oracle: plain-python evaluation of the definition."""
    n = len(vectors)
    dist = [[math.dist(vectors[i], vectors[j]) for j in range(n)] for i in range(n)]
    unique = sorted(set(labels), key=str)
    scores = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            scores.append(0.0)
            continue
        a = sum(dist[i][j] for j in own) / len(own)
        b = min(
            sum(dist[i][j] for j in range(n) if labels[j] == other)
            / sum(1 for j in range(n) if labels[j] == other)
            for other in unique if other != labels[i]
        )
        peak = max(a, b)
        scores.append((b - a) / peak if peak > 0 else 0.0)
    return sum(scores) / n


def brute_force_prf(assignment, reference):
    """Oracle: exhaustive per-(group, cluster) scoring straight from the formulas."""
    items = list(assignment)
    clusters = sorted({assignment[i] for i in items}, key=str)
    groups = sorted({reference[i] for i in items}, key=str)
    agg_p = agg_r = agg_f = 0.0
    per_group = {}
    for g in groups:
        g_items = [i for i in items if reference[i] == g]
        best = None
        for rank, c in enumerate(clusters):
            c_items = [i for i in items if assignment[i] == c]
            tp = len([i for i in g_items if assignment[i] == c])
            p = tp / len(c_items)
            r = tp / len(g_items)
            f = 2 * p * r / (p + r) if p + r else 0.0
            key = (f, tp, -rank)
            if best is None or key > best[0]:
                best = (key, p, r, f)
        _, p, r, f = best
        per_group[g] = (p, r, f)
        weight = len(g_items) / len(items)
        agg_p += weight * p
        agg_r += weight * r
        agg_f += weight * f
    return agg_p, agg_r, agg_f, per_group


def random_unit_vectors(rng, n, dim):
    v = rng.normal(size=(n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# AGNES
# ---------------------------------------------------------------------------

def test_agnes_low_threshold_all_singletons():
    vectors = [unit(a) for a in (0, 40, 80, 120)]
    clusters = agnes(vectors, threshold=0.01)
    assert sorted(c.member_ids for c in clusters) == [[0], [1], [2], [3]]


def test_agnes_threshold_two_merges_everything():
    vectors = [unit(a) for a in (0, 90, 180)]
    [cluster] = agnes(vectors, threshold=2.0)
    assert sorted(cluster.member_ids) == [0, 1, 2]


def test_agnes_unit_circle_worked_example():
    # 1 - cos(10°) ≈ 0.0152 merges first; the merged pair sits far from 90°.
    vectors = [unit(0), unit(10), unit(90)]
    clusters = agnes(vectors, threshold=0.05, linkage="average")
    assert sorted(sorted(c.member_ids) for c in clusters) == [[0, 1], [2]]
    trace = agnes_merge_trace(vectors, threshold=0.05)
    assert len(trace) == 1
    assert trace[0].distance == pytest.approx(1 - math.cos(math.radians(10)), abs=1e-12)


def test_agnes_matches_brute_force_small_batch():
    rng = np.random.default_rng(42)
    for trial in range(30):
        n = int(rng.integers(2, 9))
        vectors = random_unit_vectors(rng, n, int(rng.integers(2, 5)))
        threshold = float(rng.uniform(0.05, 1.9))
        linkage = ("average", "complete", "single")[trial % 3]
        got = agnes_merge_trace(vectors, threshold, linkage)
        _, expected = brute_force_agnes(vectors, threshold, linkage)
        assert [(m.left, m.right) for m in got] == [(l, r) for l, r, _ in expected]
        for m, (_, _, dist) in zip(got, expected):
            assert m.distance == pytest.approx(dist, abs=1e-9)


@settings(deadline=None, max_examples=40)
@given(st.integers(1, 10), st.integers(0, 10_000), st.floats(0.05, 1.95))
def test_agnes_partitions_input(n, seed, threshold):
    vectors = random_unit_vectors(np.random.default_rng(seed), n, 3)
    clusters = agnes(vectors, threshold)
    members = sorted(m for c in clusters for m in c.member_ids)
    assert members == list(range(n))


def test_agnes_threshold_monotonicity():
    rng = np.random.default_rng(3)
    vectors = random_unit_vectors(rng, 12, 3)
    counts = [len(agnes(vectors, t)) for t in (0.1, 0.3, 0.5, 0.9, 1.5, 2.0)]
    assert counts == sorted(counts, reverse=True)


def test_agnes_dimension_mismatch():
    with pytest.raises(ValueError):
        agnes([np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0])], 0.5)


def test_agnes_needs_vectors():
    with pytest.raises(ValueError):
        agnes([], 0.5)


def test_attach_titles_pairs_members():
    clusters = [Cluster(member_ids=[1, 0]), Cluster(member_ids=[2])]
    titles = [TopicTitle("a"), TopicTitle("b"), TopicTitle("c")]
    attached = attach_titles(clusters, ["x", "y", "z"], titles)
    assert attached[0].member_ids == ["y", "x"]
    assert [t.phrase_a for t in attached[0].title_candidates] == ["b", "a"]
    assert len(attached[0].title_candidates) == len(attached[0].member_ids)


# ---------------------------------------------------------------------------
# K-means
# ---------------------------------------------------------------------------

def test_kmeans_k_equals_n():
    rng = np.random.default_rng(0)
    vectors = random_unit_vectors(rng, 5, 3)
    clusters = kmeans(vectors, k=5, seed=1)
    assert sorted(c.member_ids for c in clusters) == [[0], [1], [2], [3], [4]]


def test_kmeans_k_one():
    rng = np.random.default_rng(1)
    vectors = random_unit_vectors(rng, 6, 3)
    [cluster] = kmeans(vectors, k=1, seed=0)
    assert sorted(cluster.member_ids) == list(range(6))


def test_kmeans_recovers_separated_blobs():
    rng = np.random.default_rng(5)
    blob_a = rng.normal(loc=(0, 0), scale=0.05, size=(5, 2))
    blob_b = rng.normal(loc=(10, 10), scale=0.05, size=(5, 2))
    vectors = list(np.vstack([blob_a, blob_b]))

    # Enumeration oracle: the blob split minimizes within-cluster sum of squares.
    def wcss(groups):
        total = 0.0
        for g in groups:
            pts = np.array([vectors[i] for i in g])
            total += float(((pts - pts.mean(axis=0)) ** 2).sum())
        return total

    blob_split = wcss([range(5), range(5, 10)])
    for subset_size in range(1, 5):
        for subset in itertools.combinations(range(10), subset_size):
            rest = [i for i in range(10) if i not in subset]
            if set(subset) != {0, 1, 2, 3, 4} and set(rest) != {0, 1, 2, 3, 4}:
                assert wcss([subset, rest]) > blob_split

    clusters = kmeans(vectors, k=2, seed=3)
    assert sorted(sorted(c.member_ids) for c in clusters) == [
        [0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]


def test_kmeans_objective_non_increasing():
    rng = np.random.default_rng(9)
    vectors = list(rng.normal(size=(30, 4)))
    _, objectives = lloyd_labels(vectors, k=4, seed=2)
    assert all(b <= a + 1e-9 for a, b in zip(objectives, objectives[1:]))


def test_kmeans_k_out_of_range():
    vectors = [np.array([0.0, 1.0])]
    with pytest.raises(ValueError):
        kmeans(vectors, k=2, seed=0)
    with pytest.raises(ValueError):
        kmeans(vectors, k=0, seed=0)


def test_kmeans_deterministic():
    rng = np.random.default_rng(11)
    vectors = list(rng.normal(size=(20, 3)))
    first = kmeans(vectors, k=4, seed=7)
    second = kmeans(vectors, k=4, seed=7)
    assert [c.member_ids for c in first] == [c.member_ids for c in second]


# ---------------------------------------------------------------------------
# Silhouette
# ---------------------------------------------------------------------------

def test_silhouette_two_tight_pairs():
    vectors = [np.array([0.0]), np.array([0.1]), np.array([10.0]), np.array([10.1])]
    labels = [0, 0, 1, 1]
    # Hand evaluation: a = 0.1 for every point; b is the mean distance to the
    # other pair (10.05, 9.95, 9.95, 10.05).
    expected = np.mean([(10.05 - 0.1) / 10.05, (9.95 - 0.1) / 9.95,
                        (9.95 - 0.1) / 9.95, (10.05 - 0.1) / 10.05])
    assert silhouette(vectors, labels) == pytest.approx(expected, abs=1e-12)
    assert silhouette(vectors, labels) == pytest.approx(0.99, abs=1e-3)


def test_silhouette_all_singletons_zero():
    vectors = [np.array([float(i), 0.0]) for i in range(4)]
    assert silhouette(vectors, [0, 1, 2, 3]) == 0.0


def test_silhouette_identical_pair_plus_far_point():
    vectors = [np.array([0.0, 0.0]), np.array([0.0, 0.0]), np.array([3.0, 4.0])]
    # Pair members: a = 0, b = 5 -> s = 1; singleton contributes 0.
    assert silhouette(vectors, [0, 0, 1]) == pytest.approx(2 / 3, abs=1e-12)


def test_silhouette_single_cluster_undefined():
    with pytest.raises(ValueError):
        silhouette([np.array([0.0]), np.array([1.0])], [0, 0])


def test_silhouette_matches_direct_definition():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(4, 31))
        k = int(rng.integers(2, min(n, 6)))
        vectors = list(rng.normal(size=(n, 3)))
        labels = list(rng.integers(k, size=n))
        if len(set(labels)) < 2:
            continue
        assert silhouette(vectors, labels) == pytest.approx(
            brute_force_silhouette(vectors, labels), abs=1e-9)


# ---------------------------------------------------------------------------
# Precision / recall / F1 against reference groups
# ---------------------------------------------------------------------------

def test_prf_identical_partition_is_perfect():
    assignment = {"a": 0, "b": 0, "c": 1, "d": 1}
    evaluation = cluster_prf(assignment, dict(assignment))
    assert (evaluation.precision, evaluation.recall, evaluation.f1) == (1.0, 1.0, 1.0)
    assert all(v == (1.0, 1.0, 1.0) for v in evaluation.per_group.values())


def test_prf_worked_two_group_fixture():
    # Groups {1,2 -> a}, {3,4 -> b}; clusters {1,2,3} and {4}.
    assignment = {1: "c1", 2: "c1", 3: "c1", 4: "c2"}
    reference = {1: "a", 2: "a", 3: "b", 4: "b"}
    evaluation = cluster_prf(assignment, reference)
    assert evaluation.per_group["a"] == pytest.approx((2 / 3, 1.0, 0.8))
    assert evaluation.per_group["b"] == pytest.approx((1.0, 0.5, 2 / 3))
    assert evaluation.f1 == pytest.approx(0.5 * 0.8 + 0.5 * (2 / 3), abs=1e-9)
    assert evaluation.f1 == pytest.approx(0.7333, abs=1e-4)


def test_prf_single_cluster_two_groups():
    assignment = {i: "all" for i in range(4)}
    reference = {0: "g1", 1: "g1", 2: "g2", 3: "g2"}
    evaluation = cluster_prf(assignment, reference)
    for scores in evaluation.per_group.values():
        assert scores == pytest.approx((0.5, 1.0, 2 / 3))


def test_prf_relabeling_invariance():
    assignment = {1: "x", 2: "x", 3: "y", 4: "z"}
    renamed = {1: "k9", 2: "k9", 3: "k1", 4: "k5"}
    reference = {1: "a", 2: "a", 3: "b", 4: "b"}
    first = cluster_prf(assignment, reference)
    second = cluster_prf(renamed, reference)
    assert first.f1 == pytest.approx(second.f1)
    assert first.precision == pytest.approx(second.precision)


def test_prf_item_mismatch():
    with pytest.raises(ValueError):
        cluster_prf({"a": 0}, {"b": 0})


def test_prf_matches_enumeration_oracle():
    rng = np.random.default_rng(31)
    for _ in range(25):
        n = int(rng.integers(2, 21))
        items = [f"i{j}" for j in range(n)]
        assignment = {i: int(rng.integers(1, 6)) for i in items}
        reference = {i: int(rng.integers(1, 5)) for i in items}
        evaluation = cluster_prf(assignment, reference)
        p, r, f, per_group = brute_force_prf(assignment, reference)
        assert evaluation.precision == pytest.approx(p, abs=1e-12)
        assert evaluation.recall == pytest.approx(r, abs=1e-12)
        assert evaluation.f1 == pytest.approx(f, abs=1e-12)
        for g, scores in per_group.items():
            assert evaluation.per_group[g] == pytest.approx(scores, abs=1e-12)


def test_cosine_distances_range():
    rng = np.random.default_rng(2)
    vectors = random_unit_vectors(rng, 6, 4)
    dist = cosine_distances(np.asarray(vectors))
    assert np.all(dist >= 0.0) and np.all(dist <= 2.0)
    assert np.allclose(np.diag(dist), 0.0)
