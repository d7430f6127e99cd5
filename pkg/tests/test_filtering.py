from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import make_layer
from persistnet.filtering import (
    average_clustering,
    enumerate_triangles,
    is_perfect_elimination_order,
    matching_edge_count,
    motif_inventory,
    quantile_threshold,
    tmfg,
)


def naive_tmfg_edges(matrix, transform="absolute"):
    """Independent greedy trace: recompute every gain from scratch each step."""
    w = np.abs(matrix) if transform == "absolute" else matrix.copy()
    np.fill_diagonal(w, 0.0)
    n = w.shape[0]
    strength = w.sum(axis=1)
    seed = sorted(sorted(range(n), key=lambda v: (-strength[v], v))[:4])
    edges = {tuple(sorted(p)) for p in itertools.combinations(seed, 2)}
    faces = [tuple(sorted(f)) for f in itertools.combinations(seed, 3)]
    outside = [v for v in range(n) if v not in seed]
    while outside:
        best = None
        for v in sorted(outside):
            for face in faces:
                gain = w[v, face[0]] + w[v, face[1]] + w[v, face[2]]
                key = (-gain, v, face)
                if best is None or key < best:
                    best = key
        _, v, face = best
        for u in face:
            edges.add(tuple(sorted((v, u))))
        faces.remove(face)
        a, b, c = face
        faces.extend([
            tuple(sorted((v, a, b))),
            tuple(sorted((v, a, c))),
            tuple(sorted((v, b, c))),
        ])
        outside.remove(v)
    return edges


class TestTmfgStructure:
    @pytest.mark.parametrize("n", [4, 5, 10, 50, 100])
    def test_structural_counts(self, n):
        layer = make_layer(n, seed=n)
        graph, tree = tmfg(layer)
        inventory = motif_inventory(graph, tree)
        assert len(graph.edges) == 3 * n - 6
        assert len(inventory.tetrahedra) == n - 3
        assert len(inventory.triangles) == 3 * n - 8
        assert len(inventory.separators) == max(n - 4, 0)
        assert len(inventory.face_triangles) == 2 * n - 4

    def test_n4_complete_graph(self):
        layer = make_layer(4, seed=7)
        graph, tree = tmfg(layer)
        inventory = motif_inventory(graph, tree)
        assert set(graph.edges) == set(itertools.combinations(range(4), 2))
        assert inventory.tetrahedra == ((0, 1, 2, 3),)
        assert len(inventory.triangles) == 4
        assert inventory.separators == ()

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_naive_greedy_trace(self, seed):
        layer = make_layer(6, seed=seed)
        graph, _ = tmfg(layer)
        assert set(graph.edges) == naive_tmfg_edges(layer.matrix)

    @pytest.mark.parametrize("n", [4, 7, 12, 30, 60, 200])
    def test_chordality_via_elimination(self, n):
        layer = make_layer(n, seed=100 + n)
        graph, tree = tmfg(layer)
        order = list(reversed(tree.insertion_order))
        assert is_perfect_elimination_order(graph, order)

    def test_distinct_triangle_identity(self):
        for n in (5, 9, 21, 40):
            layer = make_layer(n, seed=n * 3)
            graph, tree = tmfg(layer)
            inventory = motif_inventory(graph, tree)
            # 4(N-3) tetrahedral face slots minus (N-4) shared separators
            assert 4 * (n - 3) - (n - 4) == 3 * n - 8
            assert len(inventory.triangles) == 3 * n - 8

    def test_transform_equivalence_on_positive_layers(self):
        rng = np.random.default_rng(5)
        m = rng.uniform(0.05, 0.95, size=(12, 12))
        m = 0.5 * (m + m.T)
        np.fill_diagonal(m, 1.0)
        g_abs, _ = tmfg(m, "absolute")
        g_sgn, _ = tmfg(m, "signed")
        assert g_abs.edges == g_sgn.edges

    def test_errors(self):
        with pytest.raises(ValueError, match="at least 4"):
            tmfg(make_layer(3, seed=1).matrix)
        bad = make_layer(5, seed=1).matrix.copy()
        bad[0, 1] = bad[1, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            tmfg(bad)

    def test_weights_are_signed_correlations(self):
        layer = make_layer(8, seed=11)
        graph, _ = tmfg(layer)
        for (u, v), weight in zip(graph.edges, graph.weights):
            assert weight == layer.matrix[u, v]


class TestQuantileThreshold:
    def test_match_tmfg_sparsity(self):
        layer = make_layer(100, seed=2)
        graph = quantile_threshold(layer, matching_edge_count(100))
        assert len(graph.edges) == 294

    def test_complete_graph(self):
        layer = make_layer(8, seed=3)
        graph = quantile_threshold(layer, 28)
        assert len(graph.edges) == 28
        assert set(graph.edges) == set(itertools.combinations(range(8), 2))

    def test_top_m_sort_oracle(self, rng):
        layer = make_layer(20, seed=4)
        graph = quantile_threshold(layer, 50)
        w = np.abs(layer.matrix)
        pairs = sorted(
            itertools.combinations(range(20), 2),
            key=lambda p: (-w[p], p),
        )
        assert set(graph.edges) == set(pairs[:50])

    def test_invariant_under_monotone_transform(self):
        layer = make_layer(15, seed=9)
        base = quantile_threshold(layer, 33)
        squashed = np.tanh(2.0 * layer.matrix)
        np.fill_diagonal(squashed, 1.0)
        transformed = quantile_threshold(squashed, 33)
        assert base.edges == transformed.edges

    def test_bounds(self):
        layer = make_layer(6, seed=5)
        with pytest.raises(ValueError):
            quantile_threshold(layer, 0)
        with pytest.raises(ValueError):
            quantile_threshold(layer, 16)


class TestTriangles:
    def test_tmfg_100_has_292(self):
        layer = make_layer(100, seed=6)
        graph, _ = tmfg(layer)
        assert len(enumerate_triangles(graph)) == 292

    def test_star_graph_triangle_free(self):
        from persistnet.filtering import FilteredGraph

        star = FilteredGraph(
            n=6, edges=tuple((0, v) for v in range(1, 6)),
            weights=(1.0,) * 5, kind="quantile",
        )
        assert enumerate_triangles(star) == ()

    def test_erdos_renyi_matches_bruteforce(self, rng):
        from persistnet.filtering import FilteredGraph

        for trial in range(5):
            pairs = [p for p in itertools.combinations(range(12), 2) if rng.random() < 0.4]
            graph = FilteredGraph(
                n=12, edges=tuple(sorted(pairs)), weights=(1.0,) * len(pairs),
                kind="quantile",
            )
            edge_set = set(graph.edges)
            brute = tuple(
                t for t in itertools.combinations(range(12), 3)
                if (t[0], t[1]) in edge_set and (t[0], t[2]) in edge_set and (t[1], t[2]) in edge_set
            )
            assert enumerate_triangles(graph) == brute


class TestMotifInventory:
    def test_n100_split(self):
        layer = make_layer(100, seed=8)
        graph, tree = tmfg(layer)
        inventory = motif_inventory(graph, tree)
        assert len(inventory.separators) == 96
        assert len(inventory.face_triangles) == 196
        assert len(inventory.separators) + len(inventory.face_triangles) == 292

    def test_n5_exhaustive(self):
        layer = make_layer(5, seed=10)
        graph, tree = tmfg(layer)
        inventory = motif_inventory(graph, tree)
        assert len(inventory.tetrahedra) == 2
        assert len(inventory.separators) == 1
        assert len(inventory.face_triangles) == 6
        assert len(inventory.triangles) == 7
        # the separator is the face shared by both tetrahedra
        t1, t2 = (set(t) for t in inventory.tetrahedra)
        assert set(inventory.separators[0]) == t1 & t2

    def test_quantile_has_no_taxonomy(self):
        layer = make_layer(10, seed=11)
        graph = quantile_threshold(layer, 24)
        inventory = motif_inventory(graph)
        assert inventory.separators is None
        assert inventory.tetrahedra is None
        with pytest.raises(ValueError, match="not available"):
            inventory.motifs("separator")

    def test_tree_requirement_mismatch(self):
        layer = make_layer(10, seed=12)
        graph, tree = tmfg(layer)
        qgraph = quantile_threshold(layer, 24)
        with pytest.raises(ValueError, match="clique tree"):
            motif_inventory(graph)
        with pytest.raises(ValueError, match="clique tree"):
            motif_inventory(qgraph, tree)

    def test_motifs_accessor_canonical(self):
        layer = make_layer(9, seed=13)
        graph, tree = tmfg(layer)
        inventory = motif_inventory(graph, tree)
        for motif_class in ("edge", "triangle", "separator", "face_triangle", "tetrahedron"):
            motifs = inventory.motifs(motif_class)
            assert list(motifs) == sorted(motifs)
            assert all(tuple(sorted(m)) == m for m in motifs)
        with pytest.raises(ValueError, match="unknown"):
            inventory.motifs("pentagon")


def test_average_clustering_reference_values():
    triangle = [(0, 1), (1, 2), (0, 2)]
    assert average_clustering(triangle, 3) == 1.0
    star = [(0, 1), (0, 2), (0, 3)]
    assert average_clustering(star, 4) == 0.0
    assert average_clustering([], 4) == 0.0
    # triangle with a pendant vertex: hub 2/3... node3 skipped, corners 1.0
    graph = triangle + [(0, 3)]
    got = average_clustering(graph, 4)
    assert got == pytest.approx((1.0 / 3.0 + 1.0 + 1.0) / 3.0)
