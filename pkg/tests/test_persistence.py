import itertools
import math

import numpy as np
import pytest

from topotensor.errors import ContractError
from topotensor.filtrations import (FiltrationKind, VertexFiltration,
                                    build_lower_star_complex,
                                    compute_vertex_filtration)
from topotensor.persistence import (PersistenceDiagram, cap_essential,
                                    dump_diagrams_csv, persistence_0d,
                                    persistence_reduction)

from conftest import make_graph, random_graph

INF = math.inf


def constant_filtration(n, value=1.0):
    return VertexFiltration(np.full(n, value), FiltrationKind.DEGREE)


def gf2_rank(matrix):
    """Row-reduce a 0/1 matrix over GF(2) and return its rank."""
    m = [row.copy() for row in np.asarray(matrix, dtype=np.int64) % 2]
    rank = 0
    n_rows = len(m)
    n_cols = len(m[0]) if n_rows else 0
    pivot_row = 0
    for col in range(n_cols):
        pivot = None
        for r in range(pivot_row, n_rows):
            if m[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[pivot_row], m[pivot] = m[pivot], m[pivot_row]
        for r in range(n_rows):
            if r != pivot_row and m[r][col]:
                m[r] = (m[r] + m[pivot_row]) % 2
        pivot_row += 1
        rank += 1
    return rank


def betti_numbers_gf2(graph):
    """(beta_0, beta_1) of the 2-clique complex by GF(2) boundary ranks."""
    n = graph.node_count
    edges = [tuple(e) for e in graph.edges.tolist()]
    adj = graph.adjacency()
    triangles = [t for t in itertools.combinations(range(n), 3)
                 if adj[t[0], t[1]] and adj[t[0], t[2]] and adj[t[1], t[2]]]
    edge_index = {e: i for i, e in enumerate(edges)}
    d1 = np.zeros((n, len(edges)), dtype=np.int64)
    for j, (u, v) in enumerate(edges):
        d1[u, j] = 1
        d1[v, j] = 1
    d2 = np.zeros((len(edges), len(triangles)), dtype=np.int64)
    for j, (u, v, w) in enumerate(triangles):
        for e in ((u, v), (u, w), (v, w)):
            d2[edge_index[e], j] = 1
    r1 = gf2_rank(d1) if edges else 0
    r2 = gf2_rank(d2) if triangles else 0
    beta0 = n - r1
    beta1 = len(edges) - r1 - r2
    return beta0, beta1


class TestUnionFind0d:
    def test_path_degree(self):
        g = make_graph(3, [(0, 1), (1, 2)])
        filt = compute_vertex_filtration(g, FiltrationKind.DEGREE)
        cx = build_lower_star_complex(g, filt, max_dim=2)
        dg = persistence_0d(cx)
        # two leaves born at 1; one dies when the first edge arrives at 2;
        # the center (born 2) merges at 2 and is dropped as zero-persistence
        assert dg.points == ((1.0, 2.0), (1.0, INF))

    def test_single_node(self):
        g = make_graph(1, [])
        cx = build_lower_star_complex(g, constant_filtration(1, 5.0), max_dim=2)
        dg = persistence_0d(cx)
        assert dg.points == ((5.0, INF),)

    def test_two_disjoint_edges(self):
        g = make_graph(4, [(0, 1), (2, 3)])
        cx = build_lower_star_complex(g, constant_filtration(4), max_dim=2)
        dg = persistence_0d(cx)
        assert dg.points == ((1.0, INF), (1.0, INF))

    def test_essential_count_equals_components(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            g = random_graph(rng, n_min=1, n_max=8)
            filt = compute_vertex_filtration(g, FiltrationKind.DEGREE)
            cx = build_lower_star_complex(g, filt, max_dim=2)
            dg = persistence_0d(cx)
            beta0, _ = betti_numbers_gf2(g)
            assert dg.essential_count() == beta0


class TestReduction:
    def test_four_cycle_has_essential_loop(self):
        g = make_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        cx = build_lower_star_complex(g, constant_filtration(4), max_dim=2)
        diagrams = persistence_reduction(cx)
        assert diagrams[1].points == ((1.0, INF),)

    def test_triangle_cycle_killed_instantly(self):
        g = make_graph(3, [(0, 1), (0, 2), (1, 2)])
        cx = build_lower_star_complex(g, constant_filtration(3), max_dim=2)
        diagrams = persistence_reduction(cx)
        assert diagrams[1].points == ()

    def test_dim0_matches_union_find_exhaustive_small(self):
        # every graph on up to 4 nodes, all edge subsets
        for n in range(1, 5):
            all_edges = list(itertools.combinations(range(n), 2))
            for mask in range(2 ** len(all_edges)):
                edges = [e for i, e in enumerate(all_edges) if mask >> i & 1]
                g = make_graph(n, edges)
                filt = compute_vertex_filtration(g, FiltrationKind.DEGREE)
                cx = build_lower_star_complex(g, filt, max_dim=2)
                assert persistence_reduction(cx)[0].points == persistence_0d(cx).points

    def test_dim0_matches_union_find_random(self):
        rng = np.random.default_rng(22)
        kinds = list(FiltrationKind)
        for _ in range(200):
            g = random_graph(rng, n_min=5, n_max=8)
            kind = kinds[int(rng.integers(0, len(kinds)))]
            filt = compute_vertex_filtration(g, kind)
            cx = build_lower_star_complex(g, filt, max_dim=2)
            assert persistence_reduction(cx)[0].points == persistence_0d(cx).points

    def test_essential_dim1_count_matches_betti(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            g = random_graph(rng, n_min=3, n_max=8, p=0.5)
            filt = compute_vertex_filtration(g, FiltrationKind.DEGREE)
            cx = build_lower_star_complex(g, filt, max_dim=2)
            diagrams = persistence_reduction(cx)
            _, beta1 = betti_numbers_gf2(g)
            assert diagrams[1].essential_count() == beta1

    def test_translation_invariance(self):
        rng = np.random.default_rng(24)
        for _ in range(10):
            g = random_graph(rng, n_min=3, n_max=7, p=0.5)
            filt = compute_vertex_filtration(g, FiltrationKind.DEGREE)
            shifted = VertexFiltration(filt.values + 2.5, filt.kind)
            cx = build_lower_star_complex(g, filt, max_dim=2)
            cx_shifted = build_lower_star_complex(g, shifted, max_dim=2)
            for d, ds in zip(persistence_reduction(cx),
                             persistence_reduction(cx_shifted)):
                expected = tuple(
                    (b + 2.5, d_ + 2.5 if not math.isinf(d_) else INF)
                    for b, d_ in d.points)
                assert tuple(sorted(expected)) == ds.points

    def test_strict_birth_death_invariant(self):
        with pytest.raises(ValueError):
            PersistenceDiagram(0, ((1.0, 1.0),))


class TestCapEssential:
    def test_basic(self):
        dg = PersistenceDiagram(0, ((1.0, INF),))
        assert cap_essential(dg, 2.0).points == ((1.0, 2.0),)

    def test_empty(self):
        dg = PersistenceDiagram(0, ())
        assert cap_essential(dg, 10.0).points == ()

    def test_mixed(self):
        dg = PersistenceDiagram(0, ((1.0, 2.0), (1.0, INF)))
        assert cap_essential(dg, 3.0).points == ((1.0, 2.0), (1.0, 3.0))

    def test_cap_below_birth_raises(self):
        dg = PersistenceDiagram(0, ((2.0, INF),))
        with pytest.raises(ContractError):
            cap_essential(dg, 1.0)

    def test_cap_equal_birth_drops_point(self):
        dg = PersistenceDiagram(0, ((2.0, INF),))
        assert cap_essential(dg, 2.0).points == ()

    def test_finite_points_untouched(self):
        dg = PersistenceDiagram(1, ((0.5, 1.5),))
        assert cap_essential(dg, 9.0).points == ((0.5, 1.5),)


def test_dump_diagrams_csv(tmp_path):
    rows = [(0, "degree", 0, 1.0, 2.0), (0, "degree", 0, 1.0, INF)]
    path = tmp_path / "diagrams.csv"
    dump_diagrams_csv(rows, path)
    text = path.read_text().strip().splitlines()
    assert text[0] == "graph_id,filtration,dim,birth,death"
    assert text[1] == "0,degree,0,1.0,2.0"
    assert text[2] == "0,degree,0,1.0,inf"
