"""Vertex filtration functions and their lower-star simplicial complexes.

Four node-centrality filtrations are supported (degree, betweenness,
closeness, eigenvector). A filtration assigns one real value per node;
:func:`build_lower_star_complex` extends it to vertices, edges and
(optionally) triangles, each simplex entering at the maximum value of its
vertices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import ResourceBudgetError
from .graphs import Graph

DEFAULT_SIMPLEX_BUDGET = 5_000_000


class FiltrationKind(str, enum.Enum):
    DEGREE = "degree"
    BETWEENNESS = "betweenness"
    CLOSENESS = "closeness"
    EIGENVECTOR = "eigenvector"


DEFAULT_FILTRATIONS: Tuple[FiltrationKind, ...] = (
    FiltrationKind.DEGREE,
    FiltrationKind.BETWEENNESS,
    FiltrationKind.CLOSENESS,
    FiltrationKind.EIGENVECTOR,
)


@dataclass(frozen=True)
class VertexFiltration:
    values: np.ndarray  # (N,) finite reals
    kind: FiltrationKind

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("filtration values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Simplex:
    vertices: Tuple[int, ...]  # sorted ascending
    value: float

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices sorted by (value, dimension, vertex tuple).

    With that order every face of a simplex appears before the simplex
    itself, so prefixes of the list are valid subcomplexes.
    """

    simplices: Tuple[Simplex, ...]
    max_dim: int

    def __len__(self) -> int:
        return len(self.simplices)

    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.simplices])


def _to_networkx(graph: Graph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(graph.node_count))
    g.add_edges_from((int(u), int(v)) for u, v in graph.edges)
    return g


def _eigenvector_values(graph: Graph) -> np.ndarray:
    """Principal eigenvector of A by power iteration, |entries|, L2-normalized.

    Iterates on A + I: the shift leaves eigenvectors unchanged but breaks the
    +/-lambda symmetry of bipartite graphs that would otherwise make plain
    power iteration oscillate.
    """
    n = graph.node_count
    a = graph.adjacency() + np.eye(n)
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(1000):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        w /= norm
        if np.linalg.norm(w - v) < 1e-8:
            v = w
            break
        v = w
    return np.abs(v)


def compute_vertex_filtration(graph: Graph, kind: FiltrationKind) -> VertexFiltration:
    """One centrality value per node; all kinds are defined for disconnected graphs."""
    kind = FiltrationKind(kind)
    if kind is FiltrationKind.DEGREE:
        values = graph.degrees().astype(np.float64)
    elif kind is FiltrationKind.BETWEENNESS:
        scores = nx.betweenness_centrality(_to_networkx(graph), normalized=False)
        values = np.array([scores[i] for i in range(graph.node_count)])
    elif kind is FiltrationKind.CLOSENESS:
        # (reachable - 1) / sum of distances within the component; 0 if isolated.
        scores = nx.closeness_centrality(_to_networkx(graph), wf_improved=False)
        values = np.array([scores[i] for i in range(graph.node_count)])
    elif kind is FiltrationKind.EIGENVECTOR:
        values = _eigenvector_values(graph)
    else:  # pragma: no cover - exhaustive over the enum
        raise ValueError(f"unknown filtration kind: {kind}")
    return VertexFiltration(values=values, kind=kind)


def enumerate_triangles(graph: Graph) -> list:
    """All 3-cliques (u, v, w) with u < v < w."""
    adj = graph.neighbor_sets()
    triangles = []
    for u, v in graph.edges:
        u, v = int(u), int(v)
        for w in sorted(adj[u] & adj[v]):
            if w > v:
                triangles.append((u, v, w))
    return triangles


def build_lower_star_complex(
    graph: Graph,
    filt: VertexFiltration,
    max_dim: int = 2,
    simplex_budget: int = DEFAULT_SIMPLEX_BUDGET,
) -> FilteredComplex:
    """Lower-star filtered complex of ``graph`` up to ``max_dim`` (1 or 2).

    Vertices enter at their own value, edges at the max of their endpoints,
    triangles (max_dim=2; the 3-cliques of the graph) at the max of their
    edges. Sorting is (value, dimension, lexicographic vertex tuple) so ties
    are deterministic.
    """
    if max_dim not in (1, 2):
        raise ValueError("max_dim must be 1 or 2")
    vals = filt.values
    if len(vals) != graph.node_count:
        raise ValueError("filtration length must equal node count")

    simplices = [Simplex((i,), float(vals[i])) for i in range(graph.node_count)]
    for u, v in graph.edges:
        u, v = int(u), int(v)
        simplices.append(Simplex((u, v), float(max(vals[u], vals[v]))))
    if max_dim == 2:
        for u, v, w in enumerate_triangles(graph):
            simplices.append(Simplex((u, v, w), float(max(vals[u], vals[v], vals[w]))))

    if len(simplices) > simplex_budget:
        raise ResourceBudgetError(
            f"complex has {len(simplices)} simplices, budget is {simplex_budget}")

    simplices.sort(key=lambda s: (s.value, s.dimension, s.vertices))
    return FilteredComplex(simplices=tuple(simplices), max_dim=max_dim)
