"""Filtering of correlation layers into sparse graphs and motif inventories.

Two filters are provided. The TMFG builds a planar chordal graph of exactly
3N - 6 edges by greedy vertex insertion into triangular faces, recording the
clique tree (N - 3 tetrahedra linked through N - 4 triangular separators) as
it grows. Quantile thresholding keeps the m largest off-diagonal values with
no structural constraint; matching m = 3N - 6 makes its sparsity identical
to the TMFG's.

All tie-breaks (seed choice, insertion gains, threshold cut) are resolved
lexicographically by vertex indices so outputs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationLayer

WEIGHT_TRANSFORMS = ("absolute", "signed")


@dataclass(frozen=True)
class FilteredGraph:
    """Sparse undirected graph kept from one correlation layer.

    ``edges`` are (u, v) index pairs with u < v, sorted lexicographically;
    ``weights`` are the original signed correlation values, aligned with
    ``edges``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    kind: str
    anchor: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != len(self.edges):
            raise ValueError("weights must align with edges")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range or unordered")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        if self.kind == "tmfg" and len(self.edges) != 3 * self.n - 6:
            raise ValueError(
                f"tmfg graph must have 3N-6 = {3 * self.n - 6} edges, got {len(self.edges)}"
            )

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True)
class CliqueTree:
    """TMFG taxonomy: tetrahedra linked into a tree through triangular separators.

    ``parents[k]`` is the index of the tetrahedron that tetrahedron k was
    attached to (-1 for the seed); ``separators[k - 1]`` is the shared face.
    ``insertion_order`` lists the seed vertices first, then each inserted
    vertex in insertion order; its reverse is a perfect elimination ordering.
    """

    tetrahedra: tuple[tuple[int, int, int, int], ...]
    separators: tuple[tuple[int, int, int], ...]
    parents: tuple[int, ...]
    insertion_order: tuple[int, ...]

    def __post_init__(self):
        if len(self.parents) != len(self.tetrahedra):
            raise ValueError("parents must align with tetrahedra")
        if len(self.separators) != max(len(self.tetrahedra) - 1, 0):
            raise ValueError("separator count must be tetrahedra count - 1")
        if self.parents and self.parents[0] != -1:
            raise ValueError("first tetrahedron must be the root (parent -1)")


@dataclass(frozen=True)
class MotifInventory:
    """Canonical motif sets of one filtered layer.

    ``triangles`` holds every distinct 3-clique. For TMFG graphs they split
    into ``separators`` (faces shared by two adjacent tetrahedra) and
    ``face_triangles`` (the rest); quantile graphs leave both as None.
    All motifs are sorted vertex tuples, listed in sorted order.
    """

    n: int
    kind: str
    anchor: int | None
    edges: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    separators: tuple[tuple[int, int, int], ...] | None = None
    face_triangles: tuple[tuple[int, int, int], ...] | None = None
    tetrahedra: tuple[tuple[int, int, int, int], ...] | None = None

    def motifs(self, motif_class: str) -> tuple[tuple[int, ...], ...]:
        """Motif set for one of edge/triangle/separator/face_triangle/tetrahedron."""
        by_class = {
            "edge": self.edges,
            "triangle": self.triangles,
            "separator": self.separators,
            "face_triangle": self.face_triangles,
            "tetrahedron": self.tetrahedra,
        }
        if motif_class not in by_class:
            raise ValueError(f"unknown motif class {motif_class!r}")
        value = by_class[motif_class]
        if value is None:
            raise ValueError(f"motif class {motif_class!r} not available for kind {self.kind!r}")
        return value


def _transformed(matrix: np.ndarray, weight_transform: str) -> np.ndarray:
    if weight_transform not in WEIGHT_TRANSFORMS:
        raise ValueError(f"weight_transform must be one of {WEIGHT_TRANSFORMS}")
    w = np.abs(matrix) if weight_transform == "absolute" else np.array(matrix, dtype=float)
    np.fill_diagonal(w, 0.0)
    return w


def _layer_matrix(layer) -> tuple[np.ndarray, int | None]:
    if isinstance(layer, CorrelationLayer):
        return layer.matrix, layer.anchor
    m = np.asarray(layer, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("layer must be a square matrix")
    return m, None


def tmfg(layer, weight_transform: str = "absolute") -> tuple[FilteredGraph, CliqueTree]:
    """Build the TMFG of a correlation layer.

    The seed tetrahedron is the four vertices with the largest total
    transformed weight to all other vertices; each of the remaining N - 4
    vertices is then inserted into the triangular face maximizing the sum of
    its three transformed weights to the face, replacing that face with
    three new ones.
    """
    rho, anchor = _layer_matrix(layer)
    n = rho.shape[0]
    if n < 4:
        raise ValueError(f"TMFG needs at least 4 vertices, got {n}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("layer contains non-finite weights")
    w = _transformed(rho, weight_transform)

    row_strength = w.sum(axis=1)
    seed = sorted(sorted(range(n), key=lambda v: (-row_strength[v], v))[:4])

    edges: set[tuple[int, int]] = set()
    for a in range(4):
        for b in range(a + 1, 4):
            edges.add((seed[a], seed[b]))

    tetrahedra: list[tuple[int, int, int, int]] = [tuple(seed)]
    separators: list[tuple[int, int, int]] = []
    parents: list[int] = [-1]
    insertion_order: list[int] = list(seed)

    faces: list[tuple[int, int, int]] = [
        (seed[0], seed[1], seed[2]),
        (seed[0], seed[1], seed[3]),
        (seed[0], seed[2], seed[3]),
        (seed[1], seed[2], seed[3]),
    ]
    face_owner: list[int] = [0, 0, 0, 0]
    face_alive = [True, True, True, True]

    remaining = sorted(set(range(n)) - set(seed))
    # gains[v][f]: total transformed weight from vertex v to the face's corners
    gains = np.empty((n, 2 * n), dtype=float)
    for f, (a, b, c) in enumerate(faces):
        gains[:, f] = w[:, a] + w[:, b] + w[:, c]

    while remaining:
        rem = np.array(remaining)
        alive = np.flatnonzero(face_alive[: len(faces)])
        sub = gains[np.ix_(rem, alive)]
        best = sub.max()
        ties = np.argwhere(sub == best)
        if len(ties) == 1:
            v_pick, f_pick = int(rem[ties[0][0]]), int(alive[ties[0][1]])
        else:
            # deterministic: smallest (vertex, face vertices) among maximal gains
            v_pick, f_pick = min(
                ((int(rem[r]), int(alive[c])) for r, c in ties),
                key=lambda vf: (vf[0], faces[vf[1]]),
            )

        a, b, c = faces[f_pick]
        v = v_pick
        edges.update(((min(v, a), max(v, a)), (min(v, b), max(v, b)), (min(v, c), max(v, c))))
        tet = tuple(sorted((v, a, b, c)))
        tetrahedra.append(tet)
        separators.append((a, b, c))
        parents.append(face_owner[f_pick])
        insertion_order.append(v)
        new_tet_index = len(tetrahedra) - 1

        face_alive[f_pick] = False
        for new_face in ((v, a, b), (v, a, c), (v, b, c)):
            nf = tuple(sorted(new_face))
            if len(faces) >= gains.shape[1]:
                gains = np.concatenate([gains, np.empty_like(gains)], axis=1)
            gains[:, len(faces)] = w[:, nf[0]] + w[:, nf[1]] + w[:, nf[2]]
            faces.append(nf)
            face_owner.append(new_tet_index)
            face_alive.append(True)
        remaining.remove(v)

    edge_list = sorted(edges)
    weights = tuple(rho[u, v] for u, v in edge_list)
    graph = FilteredGraph(n=n, edges=tuple(edge_list), weights=weights, kind="tmfg", anchor=anchor)
    tree = CliqueTree(
        tetrahedra=tuple(tetrahedra),
        separators=tuple(separators),
        parents=tuple(parents),
        insertion_order=tuple(insertion_order),
    )
    return graph, tree


def quantile_threshold(layer, n_edges: int, weight_transform: str = "absolute") -> FilteredGraph:
    """Keep exactly the ``n_edges`` largest off-diagonal values of a layer.

    Equivalent to thresholding at quantile level q = 1 - m / (N(N-1)/2);
    ties at the cut are broken by lexicographic vertex-pair order.
    """
    rho, anchor = _layer_matrix(layer)
    n = rho.shape[0]
    total_pairs = n * (n - 1) // 2
    if not 1 <= n_edges <= total_pairs:
        raise ValueError(f"n_edges must be in [1, {total_pairs}], got {n_edges}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("layer contains non-finite weights")
    w = _transformed(rho, weight_transform)
    i, j = np.triu_indices(n, k=1)
    order = np.lexsort((j, i, -w[i, j]))[:n_edges]
    edge_list = sorted((int(i[k]), int(j[k])) for k in order)
    weights = tuple(rho[u, v] for u, v in edge_list)
    return FilteredGraph(n=n, edges=tuple(edge_list), weights=weights, kind="quantile", anchor=anchor)


def matching_edge_count(n: int) -> int:
    """Edge count that matches quantile-threshold sparsity to the TMFG (3N - 6)."""
    return 3 * n - 6


def enumerate_triangles(graph: FilteredGraph) -> tuple[tuple[int, int, int], ...]:
    """All distinct 3-cliques as sorted vertex tuples, in sorted order."""
    adj = graph.adjacency()
    triangles = []
    for u, v in graph.edges:
        for t in adj[u] & adj[v]:
            if t > v:
                triangles.append((u, v, t))
    return tuple(sorted(triangles))


def motif_inventory(graph: FilteredGraph, tree: CliqueTree | None = None) -> MotifInventory:
    """Enumerate the motif classes of a filtered layer.

    A clique tree must be supplied exactly when the graph is a TMFG; for
    TMFG graphs the closed-form counts (3N-8 triangles of which N-4 are
    separators, N-3 tetrahedra) are verified and a violation raises.
    """
    if (graph.kind == "tmfg") != (tree is not None):
        raise ValueError("clique tree must be present iff the graph kind is 'tmfg'")
    triangles = enumerate_triangles(graph)
    if tree is None:
        return MotifInventory(
            n=graph.n, kind=graph.kind, anchor=graph.anchor,
            edges=graph.edges, triangles=triangles,
        )
    n = graph.n
    separators = tuple(sorted(tuple(sorted(s)) for s in tree.separators))
    tetrahedra = tuple(sorted(tuple(sorted(t)) for t in tree.tetrahedra))
    face_triangles = tuple(sorted(set(triangles) - set(separators)))
    if len(triangles) != 3 * n - 8 or len(separators) != max(n - 4, 0):
        raise ValueError(
            f"inconsistent TMFG inventory: {len(triangles)} triangles, "
            f"{len(separators)} separators for N={n}"
        )
    if len(face_triangles) != 2 * n - 4 or len(tetrahedra) != n - 3:
        raise ValueError(
            f"inconsistent TMFG inventory: {len(face_triangles)} face triangles, "
            f"{len(tetrahedra)} tetrahedra for N={n}"
        )
    return MotifInventory(
        n=n, kind=graph.kind, anchor=graph.anchor,
        edges=graph.edges, triangles=triangles,
        separators=separators, face_triangles=face_triangles, tetrahedra=tetrahedra,
    )


def is_perfect_elimination_order(graph: FilteredGraph, order) -> bool:
    """Check that eliminating vertices in ``order`` always leaves clique neighborhoods.

    Passing the reverse of a TMFG's ``insertion_order`` certifies chordality.
    """
    order = list(order)
    if sorted(order) != list(range(graph.n)):
        raise ValueError("order must be a permutation of all vertices")
    adj = graph.adjacency()
    remaining = set(order)
    for v in order:
        remaining.discard(v)
        neighbors = sorted(adj[v] & remaining)
        for a in range(len(neighbors)):
            for b in range(a + 1, len(neighbors)):
                if neighbors[b] not in adj[neighbors[a]]:
                    return False
    return True


def average_clustering(edges, n: int) -> float:
    """Mean local clustering coefficient over vertices of degree >= 2.

    ``edges`` is any iterable of (u, v) pairs on vertices 0..n-1. Returns 0.0
    when no vertex has degree >= 2.
    """
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    coefficients = []
    for v in range(n):
        neighbors = sorted(adj[v])
        k = len(neighbors)
        if k < 2:
            continue
        links = sum(
            1
            for a in range(k)
            for b in range(a + 1, k)
            if neighbors[b] in adj[neighbors[a]]
        )
        coefficients.append(2.0 * links / (k * (k - 1)))
    return float(np.mean(coefficients)) if coefficients else 0.0
