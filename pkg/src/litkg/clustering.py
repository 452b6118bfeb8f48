"""Relation-type clustering: k-means, DBSCAN, and silhouette model selection.

Both algorithms are fully deterministic: k-means draws every random choice
from one seeded generator and iterates Lloyd steps to an exact assignment
fixed point; DBSCAN expands clusters in input order so border points join
the first core cluster that reaches them.  The cosine metric is handled by
L2-normalizing points and clustering on the sphere, which keeps centroids
well-defined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embeddings import cosine_distance, euclidean_distance

#: Label for points not assigned to any cluster.
NOISE = -1

_MAX_ITER = 300


@dataclass
class ClusterAssignment:
    """Labels for a batch of points, keyed by instance id (or position)."""

    labels: dict[str, int]
    k: int
    algorithm: str
    metric: str
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def label_list(self, ids: list[str]) -> list[int]:
        return [self.labels[i] for i in ids]

    def to_json(self) -> str:
        obj = {
            "algorithm": self.algorithm,
            "metric": self.metric,
            "k": self.k,
            "seed": self.seed,
            "labels": self.labels,
        }
        if self.params:
            obj["params"] = self.params
        return json.dumps(obj, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "ClusterAssignment":
        obj = json.loads(text)
        return cls(
            labels={k: int(v) for k, v in obj["labels"].items()},
            k=int(obj["k"]),
            algorithm=obj["algorithm"],
            metric=obj["metric"],
            seed=obj.get("seed"),
            params=obj.get("params", {}),
        )


@dataclass
class RelationCluster:
    """One relation type: members, their mean vector, and the medoid."""

    cluster_id: int
    members: list[str]
    centroid: np.ndarray
    medoid: str


def _as_matrix(points) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        X = np.stack([np.asarray(p, dtype=np.float64) for p in points])
    return X


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return X / safe


def _default_ids(n: int) -> list[str]:
    return [str(i) for i in range(n)]


def _pairwise(X: np.ndarray, metric: str) -> np.ndarray:
    if metric == "cosine":
        Y = _normalize_rows(X)
        D = 1.0 - Y @ Y.T
        np.fill_diagonal(D, 0.0)
        return np.maximum(D, 0.0)
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def _distance_fn(metric: str):
    if metric == "cosine":
        return cosine_distance
    if metric == "euclidean":
        return euclidean_distance
    raise ValueError(f"unknown metric {metric!r}")


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [int(rng.integers(n))]
    for _ in range(k - 1):
        d2 = np.min(
            np.stack([((X - X[c]) ** 2).sum(axis=1) for c in centers]), axis=0
        )
        total = d2.sum()
        if total == 0.0:
            # all remaining mass on chosen centers; fall back to uniform
            probs = np.full(n, 1.0 / n)
        else:
            probs = d2 / total
        centers.append(int(rng.choice(n, p=probs)))
    return X[centers].copy()


def kmeans(
    points,
    k: int,
    metric: str = "euclidean",
    seed: int = 0,
    ids: list[str] | None = None,
) -> ClusterAssignment:
    """Lloyd k-means from k-means++ seeding, deterministic given the seed.

    Runs to an exact assignment fixed point (or 300 iterations); an empty
    cluster is repaired by stealing the farthest point from the largest
    cluster.  The within-cluster objective is asserted non-increasing.
    """
    X = _as_matrix(points)
    n = len(X)
    if ids is None:
        ids = _default_ids(n)
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    distinct = len(np.unique(X, axis=0)) if n else 0
    if k > distinct:
        raise ValueError(f"k={k} exceeds {distinct} distinct points")
    if metric == "cosine":
        X = _normalize_rows(X)
    elif metric != "euclidean":
        raise ValueError(f"unknown metric {metric!r}")

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(X, k, rng)
    previous: np.ndarray | None = None
    previous_obj = np.inf
    for _ in range(_MAX_ITER):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        labels = d2.argmin(axis=1)
        counts = np.bincount(labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            largest = int(counts.argmax())
            members = np.flatnonzero(labels == largest)
            farthest = members[int(d2[members, largest].argmax())]
            labels[farthest] = empty
            centers[empty] = X[farthest]
            d2[:, empty] = ((X - X[farthest]) ** 2).sum(axis=1)
            counts = np.bincount(labels, minlength=k)
        objective = float(d2[np.arange(n), labels].sum())
        assert objective <= previous_obj + 1e-9 * max(1.0, abs(previous_obj)), (
            f"k-means objective increased: {previous_obj} -> {objective}"
        )
        previous_obj = objective
        if previous is not None and np.array_equal(labels, previous):
            break
        previous = labels.copy()
        centers = np.stack([X[labels == c].mean(axis=0) for c in range(k)])
    return ClusterAssignment(
        labels={i: int(l) for i, l in zip(ids, labels)},
        k=k,
        algorithm="kmeans",
        metric=metric,
        seed=seed,
    )


def dbscan(
    points,
    eps: float,
    min_pts: int,
    metric: str = "euclidean",
    ids: list[str] | None = None,
) -> ClusterAssignment:
    """Density clustering with standard reachability semantics.

    A point is core when at least min_pts points (itself included) lie
    within eps.  Expansion walks points in input order, so a border point
    belongs to the first core cluster reaching it; unreached points are
    NOISE.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    X = _as_matrix(points)
    n = len(X)
    if ids is None:
        ids = _default_ids(n)
    D = _pairwise(X, metric)
    neighbors = [np.flatnonzero(D[i] <= eps) for i in range(n)]
    core = [len(neighbors[i]) >= min_pts for i in range(n)]
    labels = np.full(n, NOISE, dtype=int)
    cid = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cid
        queue = [i]
        while queue:
            p = queue.pop(0)
            if not core[p]:
                continue
            for q in neighbors[p]:
                if labels[q] == NOISE:
                    labels[q] = cid
                    queue.append(q)
        cid += 1
    return ClusterAssignment(
        labels={i: int(l) for i, l in zip(ids, labels)},
        k=cid,
        algorithm="dbscan",
        metric=metric,
        params={"eps": eps, "min_pts": min_pts},
    )


def silhouette(
    points,
    assignment: ClusterAssignment,
    ids: list[str] | None = None,
    metric: str | None = None,
) -> float:
    """Mean of (b - a) / max(a, b) over non-noise points.

    a is the mean distance to same-cluster points, b the smallest mean
    distance to another cluster; singleton-cluster points score 0.  Noise
    is excluded; fewer than two clusters is an error.  ids gives the
    label-map key for each point; positions are used when omitted.
    """
    X = _as_matrix(points)
    if ids is None:
        ids = _default_ids(len(X))
    labels = [assignment.labels[i] for i in ids]
    return silhouette_from_labels(X, labels, metric or assignment.metric)


def silhouette_from_labels(points, labels, metric: str = "euclidean") -> float:
    X = _as_matrix(points)
    labels = np.asarray(labels, dtype=int)
    mask = labels != NOISE
    clusters = sorted(set(labels[mask].tolist()))
    if len(clusters) < 2:
        raise ValueError(f"silhouette undefined for {len(clusters)} cluster(s)")
    D = _pairwise(X, metric)
    scores = []
    for i in np.flatnonzero(mask):
        own = labels[i]
        same = np.flatnonzero((labels == own) & (np.arange(len(X)) != i))
        if len(same) == 0:
            scores.append(0.0)
            continue
        a = float(D[i, same].mean())
        b = min(
            float(D[i, np.flatnonzero(labels == other)].mean())
            for other in clusters
            if other != own
        )
        scores.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return float(np.mean(scores))


def select_k(
    points,
    k_grid: list[int],
    seed: int = 0,
    metric: str = "euclidean",
) -> tuple[int, dict]:
    """Pick k by silhouette over a grid of k-means runs.

    Returns (best k, diagnostics); diagnostics carry per-k scores and a
    "monotone" flag set when the scores only rise or only fall across the
    grid, the degenerate pattern that makes the argmax meaningless and
    should push the caller back to its configured k.
    """
    if not k_grid:
        raise ValueError("empty k grid")
    if any(k < 2 for k in k_grid):
        raise ValueError("silhouette model selection needs k >= 2")
    scores: dict[int, float] = {}
    for k in sorted(set(k_grid)):
        assignment = kmeans(points, k, metric=metric, seed=seed)
        labels = [assignment.labels[i] for i in _default_ids(len(points))]
        scores[k] = silhouette_from_labels(points, labels, metric)
    ordered = [scores[k] for k in sorted(scores)]
    monotone = len(ordered) >= 2 and (
        all(x < y for x, y in zip(ordered, ordered[1:]))
        or all(x > y for x, y in zip(ordered, ordered[1:]))
    )
    best = max(sorted(scores), key=lambda k: (scores[k], -k))
    diagnostics = {"scores": scores, "monotone": monotone, "best_k": best}
    return best, diagnostics


@dataclass
class ClusterBuild:
    clusters: list[RelationCluster]
    noise: list[str]


def build_clusters(assignment: ClusterAssignment, embedded: list[tuple[str, np.ndarray]]) -> ClusterBuild:
    """Materialize clusters with centroid and medoid from (id, vector) pairs.

    The centroid is the arithmetic mean of member vectors; the medoid is
    the member nearest the centroid under the assignment's metric, ties
    going to the earliest member.  NOISE ids are returned separately.
    """
    by_id = dict(embedded)
    missing = [i for i in assignment.labels if i not in by_id]
    if missing:
        raise ValueError(f"assignment covers unknown instance ids: {missing[:3]}")
    dist = _distance_fn(assignment.metric)
    groups: dict[int, list[str]] = {}
    noise: list[str] = []
    for iid, _vec in embedded:
        label = assignment.labels[iid]
        if label == NOISE:
            noise.append(iid)
        else:
            groups.setdefault(label, []).append(iid)
    clusters = []
    for cid in sorted(groups):
        members = groups[cid]
        vectors = np.stack([by_id[m] for m in members])
        centroid = vectors.mean(axis=0)
        nearest = min(range(len(members)), key=lambda j: (dist(vectors[j], centroid), j))
        clusters.append(
            RelationCluster(
                cluster_id=cid,
                members=members,
                centroid=centroid,
                medoid=members[nearest],
            )
        )
    return ClusterBuild(clusters=clusters, noise=noise)


def eps_sweep(
    points,
    eps_values: list[float],
    min_pts: int = 1,
    metric: str = "euclidean",
) -> list[dict]:
    """DBSCAN pathology report across an eps grid.

    min_pts defaults to 1 so the single-sentence-cluster regime is visible
    at small eps; at large eps everything collapses into one giant cluster.
    Each row reports cluster count, singleton fraction, noise, and the
    largest cluster's share of all points.
    """
    n = len(points)
    rows = []
    for eps in eps_values:
        assignment = dbscan(points, eps=eps, min_pts=min_pts, metric=metric)
        sizes: dict[int, int] = {}
        noise = 0
        for label in assignment.labels.values():
            if label == NOISE:
                noise += 1
            else:
                sizes[label] = sizes.get(label, 0) + 1
        n_clusters = len(sizes)
        singleton = sum(1 for s in sizes.values() if s == 1)
        rows.append(
            {
                "eps": eps,
                "clusters": n_clusters,
                "singleton_fraction": (singleton / n_clusters) if n_clusters else 0.0,
                "noise": noise,
                "largest_cluster_fraction": (max(sizes.values()) / n) if sizes else 0.0,
            }
        )
    return rows
