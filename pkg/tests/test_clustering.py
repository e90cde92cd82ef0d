import itertools
import math

import numpy as np
import pytest

from incmine import _kernels
from incmine.clustering import (
    ClusterConfig,
    ClusteringError,
    EmbeddingFormatError,
    EmbeddingMatrix,
    ipca_fit,
    kmedoids_fit,
    load_embedding_ids,
    load_embeddings,
    pairwise_distances,
    reduce_to_variance,
    save_embeddings,
    silhouette,
    sweep_k,
)

FOUR_POINTS = np.array([[0.0], [1.0], [10.0], [11.0]])


def small_fixture_suite():
    """Deterministic n <= 10, k = 2 instances with clustered geometry."""
    return [
        FOUR_POINTS,
        np.array([[0.0], [0.5], [1.0], [20.0], [20.5]]),
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
                  [9.0, 9.0], [10.0, 9.0], [9.0, 10.0]]),
        np.array([[i, 0.0] for i in range(5)] + [[i, 30.0] for i in range(5)]),
        np.zeros((6, 2)),
        np.array([[0.0], [2.0], [4.0], [50.0], [52.0], [54.0], [56.0]]),
    ]


def exhaustive_two_medoids(dist):
    """Optimal cost over all medoid pairs, lexicographic tie-break."""
    n = dist.shape[0]
    best = None
    for pair in itertools.combinations(range(n), 2):
        cost = np.minimum(dist[:, pair[0]], dist[:, pair[1]]).sum()
        if best is None or cost < best[0] - 1e-12:
            best = (cost, pair)
    return best


def principal_angles(a, b):
    """Angles between the row spans of two orthonormal matrices."""
    sv = np.linalg.svd(a @ b.T, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))


class TestPairwiseDistances:
    def test_identical_rows_exact_zero(self):
        pts = np.ones((4, 3))
        assert (pairwise_distances(pts, "euclidean") == 0.0).all()

    def test_euclidean_values(self):
        d = pairwise_distances(FOUR_POINTS, "euclidean")
        assert d[0, 2] == 10.0 and d[0, 1] == 1.0

    def test_cosine_scale_invariance(self, rng):
        pts = rng.normal(size=(12, 4)) + 3.0
        scaled = pts.copy()
        scaled[3] *= 7.5
        scaled[8] *= 0.02
        base = kmedoids_fit(pts, ClusterConfig(k=3, metric="cosine"))
        other = kmedoids_fit(scaled, ClusterConfig(k=3, metric="cosine"))
        assert (base.labels == other.labels).all()

    def test_cosine_zero_rows(self):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        d = pairwise_distances(pts, "cosine")
        assert d[0, 1] == 0.0
        assert d[0, 2] == 1.0


class TestKMedoids:
    def test_two_separated_pairs(self):
        fit = kmedoids_fit(FOUR_POINTS, ClusterConfig(k=2))
        assert fit.cost == 2.0
        assert list(fit.labels) == [0, 0, 1, 1]
        assert fit.medoids[0] in (0, 1) and fit.medoids[1] in (2, 3)

    def test_matches_exhaustive_optimum(self):
        dist = pairwise_distances(FOUR_POINTS, "euclidean")
        best_cost, _ = exhaustive_two_medoids(dist)
        fit = kmedoids_fit(FOUR_POINTS, ClusterConfig(k=2))
        assert abs(fit.cost - best_cost) < 1e-12

    def test_k_equals_n(self):
        fit = kmedoids_fit(FOUR_POINTS, ClusterConfig(k=4))
        assert fit.medoids == (0, 1, 2, 3)
        assert fit.cost == 0.0

    def test_identical_points(self):
        fit = kmedoids_fit(np.zeros((5, 2)), ClusterConfig(k=2))
        assert fit.medoids == (0, 1)
        assert fit.cost == 0.0
        assert fit.silhouette == 0.0

    def test_k_too_large(self):
        with pytest.raises(ClusteringError):
            kmedoids_fit(FOUR_POINTS, ClusterConfig(k=5))

    def test_non_finite_rejected(self):
        pts = np.array([[0.0], [np.nan]])
        with pytest.raises(ClusteringError):
            kmedoids_fit(pts, ClusterConfig(k=2))

    def test_medoid_labels_own_cluster(self, rng):
        pts = rng.normal(size=(30, 3))
        fit = kmedoids_fit(pts, ClusterConfig(k=4))
        for ci, m in enumerate(fit.medoids):
            assert fit.labels[m] == ci

    def test_cost_matches_label_assignment(self, rng):
        pts = rng.normal(size=(25, 2))
        fit = kmedoids_fit(pts, ClusterConfig(k=3))
        dist = pairwise_distances(pts, "euclidean")
        manual = sum(dist[i, fit.medoids[fit.labels[i]]] for i in range(25))
        assert abs(fit.cost - manual) < 1e-9

    def test_small_fixture_suite_reaches_optimum(self):
        # deterministic n <= 10, k = 2 fixtures: PAM equals exhaustive search
        for pts in small_fixture_suite():
            dist = pairwise_distances(pts, "euclidean")
            best_cost, _ = exhaustive_two_medoids(dist)
            fit = kmedoids_fit(pts, ClusterConfig(k=2))
            assert fit.cost <= best_cost * 1.05 + 1e-12
            assert abs(fit.cost - best_cost) < 1e-9

    def test_random_blob_instances_reach_optimum(self, rng):
        # clustered geometry, n <= 10: the swap heuristic lands on the optimum
        for _ in range(30):
            n1 = int(rng.integers(2, 6))
            n2 = int(rng.integers(2, 6))
            pts = np.vstack([rng.normal(size=(n1, 2)),
                             rng.normal(size=(n2, 2)) + 8.0])
            dist = pairwise_distances(pts, "euclidean")
            best_cost, _ = exhaustive_two_medoids(dist)
            fit = kmedoids_fit(pts, ClusterConfig(k=2))
            assert fit.cost <= best_cost * 1.05 + 1e-12
            assert abs(fit.cost - best_cost) < 1e-9

    def test_swap_pass_costs_strictly_decrease(self, rng):
        # find a seeded instance where SWAP actually fires, then step max_iter
        for attempt in range(200):
            local = np.random.default_rng(attempt)
            pts = local.normal(size=(14, 2)) + np.repeat(
                local.normal(scale=4.0, size=(3, 2)), (5, 5, 4), axis=0)
            dist = pairwise_distances(pts, "euclidean")
            build = _kernels.pam_build(dist, 3)
            _, passes = _kernels.pam_swap(dist, build, 100)
            if passes >= 2:
                break
        assert passes >= 2, "no swapping instance found"
        costs = []
        for cap in range(passes + 1):
            med, _ = _kernels.pam_swap(dist, build, cap)
            _, d1 = _kernels.assign_to_medoids(dist, np.sort(med))
            costs.append(d1.sum())
        assert all(costs[i + 1] < costs[i] for i in range(len(costs) - 1))
        build_cost = _kernels.assign_to_medoids(dist, np.sort(build))[1].sum()
        assert costs[-1] <= build_cost


class TestSilhouette:
    def test_separated_pairs_value(self):
        # a = 1 for every point, b = 10.5 or 9.5; frozen from hand computation
        value = silhouette(FOUR_POINTS, [0, 0, 1, 1])
        expected = (19 / 21 + 17 / 19) / 2
        assert abs(value - expected) < 1e-12

    def test_wide_separation_above_09(self):
        pts = np.array([[0.0], [1.0], [100.0], [101.0]])
        assert silhouette(pts, [0, 0, 1, 1]) > 0.9

    def test_identical_points_zero(self):
        assert silhouette(np.zeros((4, 2)), [0, 0, 1, 1]) == 0.0

    def test_singleton_scores_zero(self):
        pts = np.array([[0.0], [1.0], [10.0]])
        dist = pairwise_distances(pts, "euclidean")
        samples = _kernels.silhouette_samples_from_dist(
            dist, np.array([0, 0, 1]), 2)
        assert samples[2] == 0.0

    def test_single_cluster_error(self):
        with pytest.raises(ClusteringError):
            silhouette(FOUR_POINTS, [0, 0, 0, 0])


class TestSweep:
    def test_two_blobs_selects_two(self, rng):
        pts = np.vstack([rng.normal(size=(10, 2)),
                         rng.normal(size=(10, 2)) + 12.0])
        best, report = sweep_k(pts, 2, 5)
        assert len(best.medoids) == 2
        assert set(np.unique(best.labels[:10])) != set(np.unique(best.labels[10:]))
        assert [entry[0] for entry in report.entries] == [2, 3, 4, 5]

    def test_truncation_flagged(self):
        best, report = sweep_k(FOUR_POINTS, 2, 9)
        assert report.truncated
        assert report.entries[-1][0] == 4

    def test_single_k_sweep(self):
        best, report = sweep_k(FOUR_POINTS, 2, 2)
        assert len(report.entries) == 1
        assert len(best.medoids) == 2


class TestKernelEquivalence:
    def test_pam_and_silhouette_paths_agree(self, rng):
        impls = _kernels.implementations()
        for _ in range(10):
            n = int(rng.integers(8, 40))
            k = int(rng.integers(2, min(6, n)))
            pts = rng.normal(size=(n, 3))
            dist = pairwise_distances(pts, "euclidean")
            b_active = impls["pam_build"][0](dist, k)
            b_np = impls["pam_build"][1](dist, k)
            assert (b_active == b_np).all()
            s_active, p1 = impls["pam_swap"][0](dist, b_active.copy(), 100)
            s_np, p2 = impls["pam_swap"][1](dist, b_np.copy(), 100)
            assert (s_active == s_np).all() and p1 == p2
            labels, d1 = impls["assign_to_medoids"][0](dist, np.sort(s_active))
            labels_np, d1_np = impls["assign_to_medoids"][1](dist, np.sort(s_np))
            assert (labels == labels_np).all()
            assert np.allclose(d1, d1_np)
            sil = impls["silhouette_samples"][0](dist, labels, k)
            sil_np = impls["silhouette_samples"][1](dist, labels_np, k)
            assert np.allclose(sil, sil_np, atol=1e-12)

    def test_support_count_paths_agree(self, rng):
        presence = rng.random(size=(60, 10)) < 0.4
        cands = np.array(list(itertools.combinations(range(10), 3)),
                         dtype=np.int64)
        impls = _kernels.implementations()
        active = impls["support_counts"][0](presence, cands)
        fallback = impls["support_counts"][1](presence, cands)
        assert (active == fallback).all()


class TestIpca:
    def test_rank_one_line(self):
        t = np.linspace(-3.0, 3.0, 50)
        line = np.stack([t, 2.0 * t], axis=1)
        model = ipca_fit(line, batch_size=7)
        assert abs(model.explained_variance_ratio[0] - 1.0) < 1e-9
        direction = np.array([1.0, 2.0]) / math.sqrt(5.0)
        dot = abs(float(model.components[0] @ direction))
        assert abs(dot - 1.0) < 1e-9

    def test_isotropic_ratios(self):
        rng = np.random.default_rng(42)
        data = rng.normal(size=(1000, 2))
        model = ipca_fit(data, batch_size=128)
        assert (0.4 <= model.explained_variance_ratio).all()
        assert (model.explained_variance_ratio <= 0.6).all()

    def test_single_batch_matches_batch_pca(self, rng):
        data = rng.normal(size=(120, 8)) @ rng.normal(size=(8, 8))
        model = ipca_fit(data)
        centered = data - data.mean(axis=0)
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        m = 5
        angles = principal_angles(model.components[:m], vt[:m])
        assert angles.max() < 1e-6

    def test_batched_matches_batch_pca(self, rng):
        data = rng.normal(size=(500, 32)) * np.linspace(3.0, 0.2, 32)
        model = ipca_fit(data, batch_size=64)
        centered = data - data.mean(axis=0)
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        ratios = s ** 2 / (s ** 2).sum()
        m = 10
        angles = principal_angles(model.components[:m], vt[:m])
        assert angles.max() < 1e-3
        assert np.allclose(model.explained_variance_ratio[:m], ratios[:m],
                           atol=1e-3)

    def test_components_orthonormal_and_ratios_sorted(self, rng):
        data = rng.normal(size=(200, 12))
        model = ipca_fit(data, batch_size=37)
        gram = model.components @ model.components.T
        assert np.allclose(gram, np.eye(gram.shape[0]), atol=1e-8)
        ratios = model.explained_variance_ratio
        assert (np.diff(ratios) <= 1e-12).all()
        assert ratios.sum() <= 1.0 + 1e-9

    def test_inconsistent_columns(self, rng):
        with pytest.raises(ClusteringError):
            ipca_fit([rng.normal(size=(5, 3)), rng.normal(size=(5, 4))])

    def test_needs_two_samples(self):
        with pytest.raises(ClusteringError):
            ipca_fit(np.ones((1, 4)))


class TestReduceToVariance:
    def test_rank_one_needs_one(self):
        t = np.linspace(-3.0, 3.0, 50)
        line = np.stack([t, 2.0 * t], axis=1)
        model = ipca_fit(line)
        _, m = reduce_to_variance(model, line, 0.85)
        assert m == 1

    def test_isotropic_needs_two(self):
        rng = np.random.default_rng(42)
        data = rng.normal(size=(1000, 2))
        model = ipca_fit(data)
        _, m = reduce_to_variance(model, data, 0.85)
        assert m == 2

    def test_zero_threshold_single_component(self):
        rng = np.random.default_rng(1)
        data = rng.normal(size=(40, 3))
        model = ipca_fit(data)
        _, m = reduce_to_variance(model, data, 0.0)
        assert m == 1

    def test_unreachable_threshold_reports_max(self, rng):
        data = rng.normal(size=(50, 6))
        model = ipca_fit(data, n_components=2)
        with pytest.raises(ClusteringError, match="explain only"):
            reduce_to_variance(model, data, 0.999)

    def test_distance_preservation_on_full_rank(self, rng):
        data = rng.normal(size=(30, 4))
        model = ipca_fit(data)
        reduced, m = reduce_to_variance(model, data, 1.0)
        before = pairwise_distances(data, "euclidean")
        after = pairwise_distances(reduced, "euclidean")
        assert np.allclose(before, after, atol=1e-8)


class TestEmbeddingsIO:
    def test_text_roundtrip(self, tmp_path, rng):
        matrix = EmbeddingMatrix(rng.normal(size=(3, 16)))
        path = tmp_path / "emb.txt"
        save_embeddings(matrix, path, fmt="text")
        loaded = load_embeddings(path, fmt="text")
        assert loaded.values.shape == (3, 16)
        assert np.array_equal(loaded.values, matrix.values)

    def test_binary_roundtrip(self, tmp_path, rng):
        matrix = EmbeddingMatrix(rng.normal(size=(5, 4)).astype(np.float32))
        path = tmp_path / "emb.bin"
        save_embeddings(matrix, path, fmt="binary")
        loaded = load_embeddings(path, fmt="binary")
        assert np.array_equal(loaded.values, matrix.values)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 4\n1 2 3 4\n1 2 3\n", encoding="utf-8")
        with pytest.raises(EmbeddingFormatError):
            load_embeddings(path, fmt="text")

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 2\n1 2\n3 4\n", encoding="utf-8")
        with pytest.raises(EmbeddingFormatError, match="declares 3"):
            load_embeddings(path, fmt="text")

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2\nnan 1.0\n", encoding="utf-8")
        with pytest.raises(EmbeddingFormatError):
            load_embeddings(path, fmt="text")

    def test_binary_payload_size_checked(self, tmp_path):
        import struct
        path = tmp_path / "bad.bin"
        path.write_bytes(struct.pack("<QQ", 2, 4) + b"\x00" * 28)
        with pytest.raises(EmbeddingFormatError, match="28 bytes"):
            load_embeddings(path, fmt="binary")

    def test_ids_loader(self, tmp_path):
        path = tmp_path / "ids.txt"
        path.write_text("s1\ns2\n\ns3\n", encoding="utf-8")
        assert load_embedding_ids(path) == ["s1", "s2", "s3"]


class TestClusterConfig:
    def test_exactly_one_mode(self):
        with pytest.raises(ValueError):
            ClusterConfig(k=3, sweep=(2, 5))
        with pytest.raises(ValueError):
            ClusterConfig()

    def test_k_lower_bound(self):
        with pytest.raises(ValueError):
            ClusterConfig(k=1)

    def test_sweep_bounds(self):
        with pytest.raises(ValueError):
            ClusterConfig(sweep=(5, 2))
