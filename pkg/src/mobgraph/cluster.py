"""Flat and hierarchical clustering of the reduced vectors, plus the
quality metrics used for model selection and validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentCentroids,
    DegenerateVariance,
    InvalidK,
    SingleCluster,
    TooFewPoints,
)
from .seeding import rng_for


@dataclass
class KMeansResult:
    labels: np.ndarray  # (n,) int cluster ids in [0, k)
    centroids: np.ndarray  # (k, d)
    inertia: float  # sum of squared distances to assigned centroid


@dataclass
class Dendrogram:
    """n-1 merges in order; leaf ids 0..n-1, merged clusters get ids n, n+1, ...

    Each merge is (left id, right id, height, member count), left < right.
    """

    n_leaves: int
    merges: list[tuple[int, int, float, int]]


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"points must be 2-d, got shape {arr.shape}")
    return arr


def _pairwise(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


# --- k-means ---------------------------------------------------------------

def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = points[first]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            r = rng.random() * total
            pick = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            pick = min(pick, n - 1)
        centers[c] = points[pick]
        d = ((points - centers[c]) ** 2).sum(axis=1)
        closest = np.minimum(closest, d)
    return centers


def _assign(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2


def kmeans(points, k: int, seed: int = 0, n_init: int = 10) -> KMeansResult:
    """Lloyd iterations from k-means++ starts; best of n_init by inertia.

    Empty clusters are repaired by re-seeding on the point farthest from its
    assigned centroid. Ties between restarts break toward the earlier one.
    """
    points = _as_points(points)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise InvalidK(k, n)
    best: KMeansResult | None = None
    for restart in range(n_init):
        rng = rng_for(seed, "kmeans", str(restart))
        centers = _kmeans_pp(points, k, rng)
        labels = np.full(n, -1, dtype=np.int64)
        for _ in range(300):
            new_labels, d2 = _assign(points, centers)
            assigned = d2[np.arange(n), new_labels]
            for c in range(k):
                members = new_labels == c
                if members.any():
                    centers[c] = points[members].mean(axis=0)
                else:
                    far = int(assigned.argmax())
                    centers[c] = points[far]
                    new_labels[far] = c
                    assigned[far] = 0.0
            if (new_labels == labels).all():
                break
            labels = new_labels
        labels, d2 = _assign(points, centers)
        assigned = d2[np.arange(n), labels]
        for c in range(k):
            if not (labels == c).any():
                far = int(assigned.argmax())
                labels[far] = c
                centers[c] = points[far]
                assigned[far] = 0.0
        inertia = float(assigned.sum())
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels=labels, centroids=centers, inertia=inertia)
    assert best is not None
    return best


# --- metrics ----------------------------------------------------------------

def silhouette_score(points, labels) -> float:
    """Mean of (b - a)/max(a, b); singleton clusters contribute 0."""
    points = _as_points(points)
    labels = np.asarray(labels, dtype=np.int64)
    n = points.shape[0]
    clusters = np.unique(labels)
    if clusters.shape[0] < 2:
        raise SingleCluster()
    dist = _pairwise(points)
    sizes = {int(c): int((labels == c).sum()) for c in clusters}
    total = 0.0
    for i in range(n):
        own = int(labels[i])
        if sizes[own] == 1:
            continue  # contributes 0
        a = dist[i, labels == own].sum() / (sizes[own] - 1)
        b = math.inf
        for c in clusters:
            c = int(c)
            if c == own:
                continue
            b = min(b, dist[i, labels == c].mean())
        peak = max(a, b)
        if peak > 0.0:
            total += (b - a) / peak
    return total / n


def select_k_by_silhouette(
    points, k_min: int = 2, k_max: int | None = None, seed: int = 0, n_init: int = 10
) -> tuple[int, dict[int, float]]:
    """Run kmeans over [k_min, k_max], return argmax silhouette, ties to
    the smaller k, plus the full score table."""
    points = _as_points(points)
    n = points.shape[0]
    if k_max is None:
        k_max = min(10, n - 1)
    if k_min < 2 or k_max < k_min:
        raise InvalidK(k_min if k_min < 2 else k_max, n)
    scores: dict[int, float] = {}
    for k in range(k_min, k_max + 1):
        result = kmeans(points, k, seed=seed, n_init=n_init)
        scores[k] = silhouette_score(points, result.labels)
    best_k = max(scores, key=lambda k: (scores[k], -k))
    return best_k, scores


# --- hierarchical -----------------------------------------------------------

def single_linkage(points) -> Dendrogram:
    """Agglomerate by minimum inter-point distance.

    Distance ties break toward the smaller (left id, right id) pair; merged
    clusters get ids n, n+1, ... in merge order.
    """
    points = _as_points(points)
    n = points.shape[0]
    if n < 2:
        raise TooFewPoints(n, 1)
    dist = _pairwise(points)
    cluster_dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            cluster_dist[(i, j)] = float(dist[i, j])
    sizes = {i: 1 for i in range(n)}
    active = set(range(n))
    merges: list[tuple[int, int, float, int]] = []
    next_id = n
    for _ in range(n - 1):
        best = min(cluster_dist.items(), key=lambda kv: (kv[1], kv[0]))
        (left, right), height = best
        size = sizes[left] + sizes[right]
        merges.append((left, right, height, size))
        active.discard(left)
        active.discard(right)
        for other in active:
            d_left = cluster_dist.pop((min(left, other), max(left, other)))
            d_right = cluster_dist.pop((min(right, other), max(right, other)))
            cluster_dist[(other, next_id)] = min(d_left, d_right)
        del cluster_dist[(left, right)]
        sizes[next_id] = size
        active.add(next_id)
        next_id += 1
    return Dendrogram(n_leaves=n, merges=merges)


def _leaf_sets(dendrogram: Dendrogram, upto: int) -> list[set[int]]:
    """Cluster membership after applying the first `upto` merges."""
    n = dendrogram.n_leaves
    sets: dict[int, set[int]] = {i: {i} for i in range(n)}
    for m, (left, right, _h, _size) in enumerate(dendrogram.merges[:upto]):
        sets[n + m] = sets.pop(left) | sets.pop(right)
    return list(sets.values())


def cut_tree(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Undo the last k-1 merges; label clusters 0..k-1 by smallest leaf id."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise InvalidK(k, n)
    groups = _leaf_sets(dendrogram, n - k)
    groups.sort(key=min)
    labels = np.empty(n, dtype=np.int64)
    for c, group in enumerate(groups):
        for leaf in group:
            labels[leaf] = c
    return labels


def cophenetic_distances(dendrogram: Dendrogram) -> np.ndarray:
    """(n, n) matrix of first-common-merge heights."""
    n = dendrogram.n_leaves
    coph = np.zeros((n, n), dtype=np.float64)
    members: dict[int, set[int]] = {i: {i} for i in range(n)}
    for m, (left, right, height, _size) in enumerate(dendrogram.merges):
        left_set = members.pop(left)
        right_set = members.pop(right)
        for i in left_set:
            for j in right_set:
                coph[i, j] = coph[j, i] = height
        members[n + m] = left_set | right_set
    return coph


def cophenetic_correlation(dendrogram: Dendrogram, points) -> float:
    """Pearson correlation between Euclidean and cophenetic pair distances."""
    points = _as_points(points)
    n = points.shape[0]
    if n < 3:
        raise TooFewPoints(n, 2)
    dist = _pairwise(points)
    coph = cophenetic_distances(dendrogram)
    iu = np.triu_indices(n, k=1)
    x = dist[iu]
    y = coph[iu]
    xd = x - x.mean()
    yd = y - y.mean()
    sx = float(np.sqrt((xd * xd).sum()))
    sy = float(np.sqrt((yd * yd).sum()))
    if sx == 0.0:
        raise DegenerateVariance("euclidean")
    if sy == 0.0:
        raise DegenerateVariance("cophenetic")
    return float((xd * yd).sum() / (sx * sy))


def davies_bouldin(points, labels) -> float:
    """Mean over clusters of the worst (S_i + S_j) / dist(centroid_i, centroid_j)."""
    points = _as_points(points)
    labels = np.asarray(labels, dtype=np.int64)
    clusters = np.unique(labels)
    k = clusters.shape[0]
    if k < 2:
        raise SingleCluster()
    centroids = np.stack([points[labels == c].mean(axis=0) for c in clusters])
    scatter = np.array(
        [
            float(np.linalg.norm(points[labels == c] - centroids[i], axis=1).mean())
            for i, c in enumerate(clusters)
        ]
    )
    total = 0.0
    for i in range(k):
        worst = 0.0
        for j in range(k):
            if i == j:
                continue
            m = float(np.linalg.norm(centroids[i] - centroids[j]))
            if m == 0.0:
                raise CoincidentCentroids(int(clusters[i]), int(clusters[j]))
            worst = max(worst, (scatter[i] + scatter[j]) / m)
        total += worst
    return total / k


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected partition agreement; 1.0 when the correction
    denominator vanishes (both partitions trivial)."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError("label arrays must have the same length")
    n = a.shape[0]
    table: dict[tuple, int] = {}
    count_a: dict[object, int] = {}
    count_b: dict[object, int] = {}
    for x, y in zip(a.tolist(), b.tolist()):
        table[(x, y)] = table.get((x, y), 0) + 1
        count_a[x] = count_a.get(x, 0) + 1
        count_b[y] = count_b.get(y, 0) + 1

    def comb2(m: int) -> int:
        return m * (m - 1) // 2

    sum_ij = sum(comb2(c) for c in table.values())
    sum_a = sum(comb2(c) for c in count_a.values())
    sum_b = sum(comb2(c) for c in count_b.values())
    total = comb2(n)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2.0
    denom = maximum - expected
    if denom == 0.0:
        return 1.0
    return float((sum_ij - expected) / denom)
