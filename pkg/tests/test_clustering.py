import math
import random

import numpy as np
import pytest

from litkg.clustering import (
    NOISE,
    ClusterAssignment,
    build_clusters,
    dbscan,
    eps_sweep,
    kmeans,
    select_k,
    silhouette_from_labels,
)
from litkg.embeddings import euclidean_distance

from .oracles import best_two_partition, dbscan_closure, euclidean_distance_oracle, silhouette_oracle


def labels_of(assignment: ClusterAssignment, n: int) -> list[int]:
    return [assignment.labels[str(i)] for i in range(n)]


def two_blobs(rng: np.random.Generator, per_side: int = 5, sep: float = 20.0):
    a = [rng.normal(0.0, 1.0, 2) for _ in range(per_side)]
    b = [np.array([sep, sep]) + rng.normal(0.0, 1.0, 2) for _ in range(per_side)]
    return a + b


class TestKMeans:
    def test_k1_single_cluster(self):
        pts = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([2.0, 0.0])]
        asg = kmeans(pts, 1, seed=0)
        assert set(labels_of(asg, 3)) == {0}

    def test_k_equals_n_distinct(self):
        pts = [np.array([float(i), 0.0]) for i in range(4)]
        asg = kmeans(pts, 4, seed=0)
        assert sorted(labels_of(asg, 4)) == [0, 1, 2, 3]

    def test_k_above_distinct_points_rejected(self):
        pts = [np.array([1.0, 1.0])] * 3
        with pytest.raises(ValueError):
            kmeans(pts, 2, seed=0)

    def test_two_blob_recovery_matches_bruteforce(self):
        rng = np.random.default_rng(42)
        pts = two_blobs(rng)
        asg = kmeans(pts, 2, seed=7)
        labs = labels_of(asg, len(pts))
        got = frozenset(
            frozenset(i for i, l in enumerate(labs) if l == c) for c in set(labs)
        )
        want = best_two_partition([p.tolist() for p in pts])
        assert got == want

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(3)
        pts = [rng.normal(0, 1, 4) for _ in range(12)]
        a = kmeans(pts, 3, seed=5)
        b = kmeans(pts, 3, seed=5)
        assert a.to_json() == b.to_json()

    def test_cosine_metric_runs_on_sphere(self):
        pts = [np.array([10.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 5.0]), np.array([0.0, 1.0])]
        asg = kmeans(pts, 2, metric="cosine", seed=0)
        labs = labels_of(asg, 4)
        # scale must not matter under the cosine metric
        assert labs[0] == labs[1]
        assert labs[2] == labs[3]
        assert labs[0] != labs[2]

    def test_empty_cluster_repair_keeps_k_clusters(self):
        # nearly-coincident points force the repair path under bad seeding
        pts = [np.array([0.0, 0.0]), np.array([0.0, 1e-12]), np.array([50.0, 50.0]), np.array([50.0, 50.0 + 1e-12])]
        for seed in range(10):
            asg = kmeans(pts, 3, seed=seed)
            assert len(set(labels_of(asg, 4))) == 3


class TestDBSCAN:
    def test_identical_points_one_cluster(self):
        pts = [np.array([1.0, 1.0])] * 4
        asg = dbscan(pts, eps=0.5, min_pts=2)
        assert set(labels_of(asg, 4)) == {0}

    def test_all_noise_when_eps_too_small(self):
        pts = [np.array([float(3 * i), 0.0]) for i in range(5)]
        asg = dbscan(pts, eps=1.0, min_pts=2)
        assert set(labels_of(asg, 5)) == {NOISE}
        assert asg.k == 0

    def test_matches_closure_oracle_random(self):
        rng = np.random.default_rng(9)
        for trial in range(60):
            n = int(rng.integers(2, 13))
            pts = [rng.normal(0, 1.5, 2) for _ in range(n)]
            eps = float(rng.uniform(0.4, 2.0))
            min_pts = int(rng.integers(1, 4))
            asg = dbscan(pts, eps=eps, min_pts=min_pts)
            labs = labels_of(asg, n)
            got_clusters = {
                frozenset(i for i, l in enumerate(labs) if l == c)
                for c in set(labs)
                if c != NOISE
            }
            want_clusters, want_noise = dbscan_closure(
                [p.tolist() for p in pts], eps, min_pts, euclidean_distance_oracle
            )
            assert got_clusters == {frozenset(c) for c in want_clusters}
            assert {i for i, l in enumerate(labs) if l == NOISE} == want_noise

    def test_permutation_invariant_up_to_relabeling(self):
        rng = np.random.default_rng(17)
        base = [rng.normal(0, 1.0, 2) for _ in range(5)]
        pts = [b + off for off in (np.zeros(2), np.array([10.0, 0.0])) for b in base]
        order = list(range(len(pts)))
        canonical = None
        for _ in range(5):
            random.Random(1).shuffle(order)
            shuffled = [pts[i] for i in order]
            asg = dbscan(shuffled, eps=3.0, min_pts=2)
            labs = labels_of(asg, len(pts))
            back = {order[i]: labs[i] for i in range(len(pts))}
            partition = frozenset(
                frozenset(i for i in back if back[i] == c)
                for c in set(back.values())
                if c != NOISE
            )
            canonical = canonical or partition
            assert partition == canonical


class TestSilhouette:
    def test_single_cluster_is_error(self):
        pts = [np.zeros(2), np.ones(2)]
        with pytest.raises(ValueError):
            silhouette_from_labels(pts, [0, 0])

    def test_hand_computed_four_points(self):
        pts = [
            np.array([0.0, 0.0]),
            np.array([0.0, 1.0]),
            np.array([10.0, 0.0]),
            np.array([10.0, 1.0]),
        ]
        labels = [0, 0, 1, 1]
        b = (10.0 + math.sqrt(101.0)) / 2.0
        expected = (b - 1.0) / b
        assert silhouette_from_labels(pts, labels) == pytest.approx(expected, abs=1e-12)
        assert silhouette_from_labels(pts, labels) == pytest.approx(
            silhouette_oracle([p.tolist() for p in pts], labels, euclidean_distance_oracle),
            abs=1e-12,
        )

    def test_far_blobs_score_above_09(self):
        rng = np.random.default_rng(2)
        pts = two_blobs(rng, per_side=6, sep=40.0)
        labels = [0] * 6 + [1] * 6
        assert silhouette_from_labels(pts, labels) > 0.9

    def test_matches_formula_oracle_random(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(4, 12))
            pts = [rng.normal(0, 2.0, 3) for _ in range(n)]
            labels = [int(rng.integers(0, 3)) for _ in range(n)]
            if len(set(labels)) < 2:
                labels[0], labels[1] = 0, 1
            got = silhouette_from_labels(pts, labels)
            want = silhouette_oracle([p.tolist() for p in pts], labels, euclidean_distance_oracle)
            assert got == pytest.approx(want, abs=1e-9)

    def test_noise_excluded(self):
        pts = [np.zeros(2), np.zeros(2), np.ones(2), np.ones(2), np.array([99.0, 99.0])]
        labels = [0, 0, 1, 1, NOISE]
        with_noise = silhouette_from_labels(pts, labels)
        without = silhouette_from_labels(pts[:4], labels[:4])
        assert with_noise == pytest.approx(without)

    def test_duplicate_point_invariance(self):
        # clusters of exact duplicates at distinct locations score 1.0,
        # and duplicating every point changes nothing
        pts = [np.zeros(2)] * 3 + [np.array([5.0, 5.0])] * 3
        labels = [0, 0, 0, 1, 1, 1]
        before = silhouette_from_labels(pts, labels)
        doubled = pts + pts
        doubled_labels = labels + labels
        after = silhouette_from_labels(doubled, doubled_labels)
        assert before == pytest.approx(1.0)
        assert after == pytest.approx(before)


class TestSelectK:
    def test_single_entry_grid(self):
        pts = [np.array([float(i), 0.0]) for i in range(6)]
        best, diag = select_k(pts, [2], seed=0)
        assert best == 2
        assert diag["monotone"] is False

    def test_three_blobs_selects_three(self):
        rng = np.random.default_rng(0)
        pts = []
        for center in ((0.0, 0.0), (30.0, 0.0), (0.0, 30.0)):
            pts += [np.array(center) + rng.normal(0, 0.5, 2) for _ in range(6)]
        best, diag = select_k(pts, [2, 3, 4], seed=1)
        assert best == 3
        assert not diag["monotone"]

    def test_collinear_equispaced_is_monotone(self):
        pts = [np.array([float(i), 0.0]) for i in range(12)]
        _, diag = select_k(pts, [2, 3, 4], seed=0)
        assert diag["monotone"] is True

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            select_k([np.zeros(2), np.ones(2)], [], seed=0)


class TestBuildClusters:
    def embedded(self, vectors):
        return [(f"i{n}", np.asarray(v, dtype=float)) for n, v in enumerate(vectors)]

    def assignment(self, labels, metric="euclidean"):
        return ClusterAssignment(
            labels={f"i{n}": l for n, l in enumerate(labels)},
            k=len({l for l in labels if l != NOISE}),
            algorithm="kmeans",
            metric=metric,
        )

    def test_singleton_medoid_is_member(self):
        build = build_clusters(self.assignment([0]), self.embedded([[1.0, 2.0]]))
        assert build.clusters[0].medoid == "i0"
        assert np.array_equal(build.clusters[0].centroid, np.array([1.0, 2.0]))

    def test_two_member_centroid_is_midpoint(self):
        build = build_clusters(self.assignment([0, 0]), self.embedded([[0.0, 0.0], [2.0, 2.0]]))
        assert np.array_equal(build.clusters[0].centroid, np.array([1.0, 1.0]))

    def test_six_member_medoid_matches_scan(self):
        rng = np.random.default_rng(8)
        vectors = [rng.normal(0, 1, 4) for _ in range(6)]
        build = build_clusters(self.assignment([0] * 6), self.embedded(vectors))
        centroid = np.mean(vectors, axis=0)
        distances = [euclidean_distance_oracle(v.tolist(), centroid.tolist()) for v in vectors]
        assert build.clusters[0].medoid == f"i{int(np.argmin(distances))}"

    def test_noise_collected(self):
        build = build_clusters(
            self.assignment([0, NOISE, 0]),
            self.embedded([[0.0, 0.0], [9.0, 9.0], [1.0, 1.0]]),
        )
        assert build.noise == ["i1"]
        assert build.clusters[0].members == ["i0", "i2"]


class TestEpsSweep:
    def test_extremes(self):
        rng = np.random.default_rng(5)
        pts = [rng.normal(0, 1.0, 2) for _ in range(6)]
        pts += [np.array([50.0, 50.0]) + rng.normal(0, 1.0, 2) for _ in range(6)]
        rows = eps_sweep(pts, [1e-6, 500.0], min_pts=1)
        assert rows[0]["singleton_fraction"] == 1.0
        assert rows[1]["clusters"] == 1
        assert rows[1]["largest_cluster_fraction"] == 1.0
