"""Persistence diagrams of filtered complexes.

Dimension-0 diagrams come from a union-find sweep with the elder rule;
diagrams in all dimensions come from the standard GF(2) boundary-matrix
column reduction. The two routes are cross-checked in the test suite.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

from .errors import ContractError, ResourceBudgetError
from .filtrations import FilteredComplex

INF = math.inf


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs for one homology dimension.

    Zero-persistence pairs are dropped, so birth < death for every finite
    point; essential classes carry death = inf.
    """

    dimension: int
    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple(sorted((float(b), float(d)) for b, d in self.points))
        for b, d in pts:
            if not b < d:
                raise ValueError(f"diagram point must have birth < death, got ({b}, {d})")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def essential_count(self) -> int:
        return sum(1 for _, d in self.points if math.isinf(d))

    def finite_points(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(p for p in self.points if not math.isinf(p[1]))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root


def persistence_0d(complex_: FilteredComplex) -> PersistenceDiagram:
    """Dimension-0 diagram by union-find with the elder rule.

    On a merge the component with the smaller birth value survives; birth
    ties are broken in favor of the smaller representative vertex index.
    Each connected component contributes one essential point.
    """
    n_vertices = sum(1 for s in complex_.simplices if s.dimension == 0)
    uf = _UnionFind(n_vertices)
    birth = [0.0] * n_vertices
    rep = list(range(n_vertices))
    alive = [False] * n_vertices
    points: List[Tuple[float, float]] = []

    for s in complex_.simplices:
        if s.dimension == 0:
            v = s.vertices[0]
            birth[v] = s.value
            rep[v] = v
            alive[v] = True
        elif s.dimension == 1:
            u, v = s.vertices
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue  # creates a cycle, not a dim-0 event
            if (birth[ru], rep[ru]) <= (birth[rv], rep[rv]):
                survivor, dying = ru, rv
            else:
                survivor, dying = rv, ru
            if birth[dying] < s.value:  # zero-persistence merges are dropped
                points.append((birth[dying], s.value))
            uf.parent[dying] = survivor

    for v in range(n_vertices):
        if alive[v] and uf.find(v) == v:
            points.append((birth[v], INF))

    return PersistenceDiagram(dimension=0, points=tuple(points))


def persistence_reduction(
    complex_: FilteredComplex,
    simplex_budget: int = 5_000_000,
) -> List[PersistenceDiagram]:
    """Diagrams for dimensions 0..max_dim-1 by GF(2) column reduction.

    Columns are reduced in filtration order; a reduced-to-nonzero column
    pairs its lowest row (birth simplex) with itself (death simplex), and
    positive simplices that are never chosen as a pivot are essential.
    """
    simplices = complex_.simplices
    if len(simplices) > simplex_budget:
        raise ResourceBudgetError(
            f"complex has {len(simplices)} simplices, budget is {simplex_budget}")

    index_of = {s.vertices: i for i, s in enumerate(simplices)}
    columns: List[set] = []
    for s in simplices:
        if s.dimension == 0:
            columns.append(set())
        else:
            faces = set()
            for k in range(len(s.vertices)):
                face = s.vertices[:k] + s.vertices[k + 1:]
                faces.add(index_of[face])
            columns.append(faces)

    low_to_col = {}
    pairs = []  # (birth simplex index, death simplex index)
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            if low not in low_to_col:
                break
            col ^= columns[low_to_col[low]]
        if col:
            low = max(col)
            low_to_col[low] = j
            pairs.append((low, j))
        columns[j] = col

    paired_births = {i for i, _ in pairs}
    paired_deaths = {j for _, j in pairs}
    diagrams = {q: [] for q in range(complex_.max_dim)}
    for i, j in pairs:
        q = simplices[i].dimension
        b, d = simplices[i].value, simplices[j].value
        if q in diagrams and b < d:
            points = diagrams[q]
            points.append((b, d))
    for i, s in enumerate(simplices):
        if i in paired_births or i in paired_deaths:
            continue
        # column i reduced to zero and never became a pivot: essential class
        if s.dimension in diagrams:
            diagrams[s.dimension].append((s.value, INF))

    return [PersistenceDiagram(dimension=q, points=tuple(diagrams[q]))
            for q in range(complex_.max_dim)]


def cap_essential(diagram: PersistenceDiagram, cap: float) -> PersistenceDiagram:
    """Replace every infinite death by ``cap``; finite points are untouched.

    A capped point whose birth equals the cap would have zero persistence
    and is dropped, consistent with the strict birth < death invariant.
    """
    points = []
    for b, d in diagram.points:
        if math.isinf(d):
            if cap < b:
                raise ContractError(
                    f"cap {cap} is below the birth {b} of an essential class")
            if cap > b:
                points.append((b, float(cap)))
        else:
            points.append((b, d))
    return PersistenceDiagram(dimension=diagram.dimension, points=tuple(points))


def dump_diagrams_csv(rows: Iterable[tuple], path) -> None:
    """Write diagnostic rows (graph_id, filtration, dim, birth, death) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph_id", "filtration", "dim", "birth", "death"])
        for graph_id, filtration, dim, birth, death in rows:
            death_str = "inf" if math.isinf(death) else repr(float(death))
            writer.writerow([graph_id, filtration, dim, repr(float(birth)), death_str])
