"""Clustering of title embeddings and the clustering evaluation metrics.

The production grouping is bottom-up agglomerative nesting in cosine
distance with a threshold stop rule. A seeded k-means serves as the
baseline. Evaluation provides the silhouette coefficient and the
reference-partition precision/recall/F1 scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .catalog import TopicTitle

LINKAGES = ("average", "complete", "single")

_NORM_EPS = 1e-12


@dataclass
class Cluster:
    """A group of items; members reference catalog products or raw indices."""

    member_ids: list
    title_candidates: list[TopicTitle] = field(default_factory=list)

    def __post_init__(self):
        if not self.member_ids:
            raise ValueError("cluster must have at least one member")


@dataclass(frozen=True)
class MergeStep:
    left: frozenset
    right: frozenset
    distance: float


def _as_matrix(vectors: Sequence[np.ndarray]) -> np.ndarray:
    if len(vectors) == 0:
        raise ValueError("need at least one vector")
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"mixed vector dimensions: {sorted(dims)}")
    return np.asarray(vectors, dtype=float)


def cosine_distances(matrix: np.ndarray) -> np.ndarray:
    norms = np.maximum(np.linalg.norm(matrix, axis=1), _NORM_EPS)
    sims = (matrix @ matrix.T) / np.outer(norms, norms)
    dist = 1.0 - np.clip(sims, -1.0, 1.0)
    np.fill_diagonal(dist, 0.0)
    return dist


# ---------------------------------------------------------------------------
# Agglomerative nesting
# ---------------------------------------------------------------------------

def _agnes_engine(vectors: Sequence[np.ndarray], threshold: float,
                  linkage: str) -> tuple[list[list[int]], list[MergeStep]]:
    """Merge the closest pair until the global minimum exceeds the threshold.

    Clusters are keyed by their lowest original member index; tied distances
    resolve to the lexicographically smallest key pair. Cluster-to-cluster
    distances are maintained by Lance-Williams updates.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; choose one of {LINKAGES}")
    matrix = _as_matrix(vectors)
    n = len(matrix)
    base = cosine_distances(matrix)
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    dist: dict[tuple[int, int], float] = {
        (i, j): float(base[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    merges: list[MergeStep] = []
    while dist:
        (a, b), best = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        if best > threshold:
            break
        merges.append(MergeStep(frozenset(members[a]), frozenset(members[b]), best))
        size_a, size_b = len(members[a]), len(members[b])
        for key in list(members):
            if key in (a, b):
                continue
            d_ak = dist.pop((min(a, key), max(a, key)))
            d_bk = dist.pop((min(b, key), max(b, key)))
            if linkage == "average":
                merged = (size_a * d_ak + size_b * d_bk) / (size_a + size_b)
            elif linkage == "complete":
                merged = max(d_ak, d_bk)
            else:
                merged = min(d_ak, d_bk)
            dist[(min(a, key), max(a, key))] = merged
        del dist[(a, b)]
        members[a] = members[a] + members[b]
        del members[b]
    clusters = [sorted(members[key]) for key in sorted(members)]
    return clusters, merges


def agnes(vectors: Sequence[np.ndarray], threshold: float,
          linkage: str = "average") -> list[Cluster]:
    groups, _ = _agnes_engine(vectors, threshold, linkage)
    return [Cluster(member_ids=list(group)) for group in groups]


def agnes_merge_trace(vectors: Sequence[np.ndarray], threshold: float,
                      linkage: str = "average") -> list[MergeStep]:
    return _agnes_engine(vectors, threshold, linkage)[1]


def attach_titles(clusters: Sequence[Cluster], ids: Sequence, titles: Sequence[TopicTitle]) -> list[Cluster]:
    """Map index members to item ids, pairing each member with its title."""
    out = []
    for cluster in clusters:
        out.append(Cluster(
            member_ids=[ids[i] for i in cluster.member_ids],
            title_candidates=[titles[i] for i in cluster.member_ids],
        ))
    return out


# ---------------------------------------------------------------------------
# K-means baseline
# ---------------------------------------------------------------------------

def lloyd_labels(vectors: Sequence[np.ndarray], k: int, seed: int,
                 max_iter: int = 100) -> tuple[np.ndarray, list[float]]:
    """K-means++ initialized Lloyd iterations; returns labels and the
    within-cluster-sum-of-squares after each update step."""
    matrix = _as_matrix(vectors)
    n = len(matrix)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)

    centers = np.empty((k, matrix.shape[1]))
    chosen = [int(rng.integers(n))]
    centers[0] = matrix[chosen[0]]
    for c in range(1, k):
        d2 = np.min(((matrix[:, None, :] - centers[None, :c, :]) ** 2).sum(axis=2), axis=1)
        total = d2.sum()
        if total <= 0:
            # All remaining points coincide with a center; take the smallest unused index.
            pick = next(i for i in range(n) if i not in chosen)
        else:
            pick = int(rng.choice(n, p=d2 / total))
        chosen.append(pick)
        centers[c] = matrix[pick]

    labels = np.zeros(n, dtype=int)
    objectives: list[float] = []
    for _ in range(max_iter):
        sq = ((matrix[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(sq, axis=1)
        for empty in range(k):
            if np.any(new_labels == empty):
                continue
            sizes = np.bincount(new_labels, minlength=k)
            donor = int(np.argmax(sizes))
            donor_points = np.flatnonzero(new_labels == donor)
            centroid = matrix[donor_points].mean(axis=0)
            farthest = donor_points[int(np.argmax(((matrix[donor_points] - centroid) ** 2).sum(axis=1)))]
            new_labels[farthest] = empty
        for c in range(k):
            centers[c] = matrix[new_labels == c].mean(axis=0)
        objectives.append(float(((matrix - centers[new_labels]) ** 2).sum()))
        if np.array_equal(new_labels, labels) and len(objectives) > 1:
            break
        labels = new_labels
    return labels, objectives


def kmeans(vectors: Sequence[np.ndarray], k: int, seed: int,
           max_iter: int = 100) -> list[Cluster]:
    labels, _ = lloyd_labels(vectors, k, seed, max_iter)
    groups: dict[int, list[int]] = {}
    for i, label in enumerate(labels):
        groups.setdefault(int(label), []).append(i)
    return [Cluster(member_ids=groups[key]) for key in sorted(groups)]


# ---------------------------------------------------------------------------
# Evaluation metrics
# ---------------------------------------------------------------------------

def silhouette(vectors: Sequence[np.ndarray], labels: Sequence[Hashable]) -> float:
    """Mean of (b - a) / max(a, b) over items, Euclidean distance.

    Singleton clusters contribute 0; requires at least two clusters.
    """
    matrix = _as_matrix(vectors)
    if len(labels) != len(matrix):
        raise ValueError("labels must align with vectors")
    unique = sorted(set(labels), key=str)
    if len(unique) < 2:
        raise ValueError("silhouette is undefined for a single cluster")
    label_arr = np.array([unique.index(l) for l in labels])
    diff = matrix[:, None, :] - matrix[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    scores = []
    for i in range(len(matrix)):
        own = label_arr == label_arr[i]
        own_count = own.sum() - 1
        if own_count == 0:
            scores.append(0.0)
            continue
        a = dist[i, own].sum() / own_count
        b = min(dist[i, label_arr == other].mean()
                for other in range(len(unique)) if other != label_arr[i])
        peak = max(a, b)
        scores.append((b - a) / peak if peak > 0 else 0.0)
    return float(np.mean(scores))


@dataclass(frozen=True)
class ClusterEval:
    precision: float
    recall: float
    f1: float
    per_group: dict[Hashable, tuple[float, float, float]]
    silhouette: float | None = None

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "silhouette": self.silhouette,
            "per_group": {str(g): {"precision": p, "recall": r, "f1": f}
                          for g, (p, r, f) in self.per_group.items()},
        }


def cluster_prf(assignment: Mapping[Hashable, Hashable],
                reference: Mapping[Hashable, Hashable]) -> ClusterEval:
    """Per-group scores against the F-maximizing predicted cluster.

    For group i and cluster j: precision = overlap / cluster size, recall =
    overlap / group size. Each group reports the (P, R, F) of its best-F
    cluster (ties: larger overlap, then earlier cluster in sorted label
    order); aggregates are group-size-weighted means.
    """
    if set(assignment) != set(reference):
        raise ValueError("assignment and reference must cover the same items")
    if not assignment:
        raise ValueError("empty item set")
    cluster_labels = sorted({assignment[item] for item in assignment}, key=str)
    group_labels = sorted({reference[item] for item in reference}, key=str)
    cluster_size = {c: 0 for c in cluster_labels}
    group_size = {g: 0 for g in group_labels}
    overlap: dict[tuple[Hashable, Hashable], int] = {}
    for item in assignment:
        c, g = assignment[item], reference[item]
        cluster_size[c] += 1
        group_size[g] += 1
        overlap[(g, c)] = overlap.get((g, c), 0) + 1

    per_group: dict[Hashable, tuple[float, float, float]] = {}
    total = len(assignment)
    agg = np.zeros(3)
    for g in group_labels:
        best = None  # (f, tp, -cluster_rank, p, r)
        for rank, c in enumerate(cluster_labels):
            tp = overlap.get((g, c), 0)
            p = tp / cluster_size[c]
            r = tp / group_size[g]
            f = 2 * p * r / (p + r) if p + r > 0 else 0.0
            key = (f, tp, -rank)
            if best is None or key > best[0]:
                best = (key, p, r, f)
        _, p, r, f = best
        per_group[g] = (p, r, f)
        agg += (group_size[g] / total) * np.array([p, r, f])
    return ClusterEval(
        precision=float(agg[0]),
        recall=float(agg[1]),
        f1=float(agg[2]),
        per_group=per_group,
    )
