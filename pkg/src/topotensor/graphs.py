"""Graph data model, TUDataset-format ingestion, and normalized-adjacency algebra.

A :class:`Graph` is an undirected node-attributed graph with a class label.
Datasets in the TUDataset text format (``<name>_A.txt`` etc.) are loaded with
:func:`load_tu_dataset` and written back with :func:`write_tu_dataset`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import FormatError, IngestionError

DEGREE_FEATURE_BINS = 32


@dataclass(frozen=True)
class Graph:
    """Undirected attributed graph with 0-indexed nodes.

    ``edges`` holds each undirected edge once as (u, v) with u < v.
    ``node_features`` is the N x F feature matrix; F >= 1 always holds after
    featurization. ``node_labels`` keeps the raw integer node labels when the
    source dataset provides them.
    """

    node_count: int
    edges: np.ndarray  # (E, 2) int
    node_features: np.ndarray  # (N, F) float
    graph_label: int
    edge_weights: Optional[np.ndarray] = None  # (E,), defaults to ones
    node_labels: Optional[np.ndarray] = None  # (N,) int

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        feats = np.asarray(self.node_features, dtype=np.float64)
        object.__setattr__(self, "node_features", feats)
        n = self.node_count
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint outside [0, node_count)")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loops are not allowed in the raw edge set")
            canon = np.sort(edges, axis=1)
            object.__setattr__(self, "edges", canon)
            if len({(int(u), int(v)) for u, v in canon}) != len(canon):
                raise ValueError("duplicate undirected edge")
        if feats.ndim != 2 or feats.shape[0] != n:
            raise ValueError(f"node_features must have {n} rows, got {feats.shape}")
        if feats.shape[1] < 1:
            raise ValueError("node_features must have at least one column")
        if self.edge_weights is None:
            object.__setattr__(self, "edge_weights", np.ones(len(edges)))
        else:
            w = np.asarray(self.edge_weights, dtype=np.float64).reshape(-1)
            if len(w) != len(edges):
                raise ValueError("edge_weights length must match edges")
            object.__setattr__(self, "edge_weights", w)

    @property
    def num_features(self) -> int:
        return self.node_features.shape[1]

    def degrees(self) -> np.ndarray:
        """Unweighted degree of every node."""
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        """Dense symmetric weighted adjacency matrix A."""
        a = np.zeros((self.node_count, self.node_count))
        for (u, v), w in zip(self.edges, self.edge_weights):
            a[u, v] = w
            a[v, u] = w
        return a

    def neighbor_sets(self) -> list:
        adj = [set() for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].add(int(v))
            adj[v].add(int(u))
        return adj

    def relabeled(self, perm: Sequence[int]) -> "Graph":
        """New graph with node i renamed to perm[i] (perm is a permutation)."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(self.node_count)
        edges = perm[self.edges]
        feats = self.node_features[inv]
        labels = self.node_labels[inv] if self.node_labels is not None else None
        return Graph(self.node_count, edges, feats, self.graph_label,
                     edge_weights=self.edge_weights.copy(), node_labels=labels)


@dataclass
class Dataset:
    name: str
    graphs: list
    num_classes: int

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("a classification dataset needs at least 2 classes")
        for g in self.graphs:
            if not 0 <= g.graph_label < self.num_classes:
                raise ValueError("graph label outside [0, num_classes)")

    def __len__(self) -> int:
        return len(self.graphs)

    def labels(self) -> np.ndarray:
        return np.array([g.graph_label for g in self.graphs], dtype=np.int64)


def _read_lines(path: Path) -> list:
    # TUDataset files may carry CRLF endings and trailing whitespace.
    with open(path, "r", newline="") as fh:
        return [line.rstrip("\r\n ").rstrip() for line in fh]


def _require(directory: Path, filename: str) -> Path:
    path = directory / filename
    if not path.is_file():
        raise IngestionError(f"mandatory dataset file not found: {path}")
    return path


def load_tu_dataset(directory, name: str) -> Dataset:
    """Load a dataset in TUDataset text format from ``directory``.

    Expects ``<name>_A.txt`` (1-indexed edge pairs, both directions),
    ``<name>_graph_indicator.txt`` and ``<name>_graph_labels.txt``; uses
    ``<name>_node_attributes.txt`` for features when present, else one-hot
    ``<name>_node_labels.txt``, else one-hot binned degrees.
    """
    directory = Path(directory)
    adj_path = _require(directory, f"{name}_A.txt")
    ind_path = _require(directory, f"{name}_graph_indicator.txt")
    lab_path = _require(directory, f"{name}_graph_labels.txt")

    indicator = []
    for lineno, line in enumerate(_read_lines(ind_path), start=1):
        if not line:
            continue
        try:
            indicator.append(int(line))
        except ValueError:
            raise FormatError(f"{ind_path}:{lineno}: not an integer graph id: {line!r}")
    indicator = np.asarray(indicator, dtype=np.int64)
    n_nodes_total = len(indicator)
    graph_ids = np.unique(indicator)
    n_graphs = len(graph_ids)
    if not np.array_equal(graph_ids, np.arange(1, n_graphs + 1)):
        raise FormatError(f"{ind_path}: graph ids must be contiguous starting at 1")

    raw_labels = []
    for lineno, line in enumerate(_read_lines(lab_path), start=1):
        if not line:
            continue
        try:
            raw_labels.append(int(float(line)))
        except ValueError:
            raise FormatError(f"{lab_path}:{lineno}: not a label: {line!r}")
    if len(raw_labels) != n_graphs:
        raise FormatError(
            f"{lab_path}: {len(raw_labels)} labels for {n_graphs} graphs")

    # Remap labels to contiguous [0, C) in sorted order of the raw values.
    classes = sorted(set(raw_labels))
    class_of = {c: i for i, c in enumerate(classes)}
    labels = [class_of[l] for l in raw_labels]

    # Per-graph local node ids; file node ids are 1-indexed and global.
    node_graph = indicator - 1  # 0-indexed graph per node
    local_id = np.zeros(n_nodes_total, dtype=np.int64)
    node_counts = np.zeros(n_graphs, dtype=np.int64)
    for i, g in enumerate(node_graph):
        local_id[i] = node_counts[g]
        node_counts[g] += 1

    edge_lists = [[] for _ in range(n_graphs)]
    seen = [set() for _ in range(n_graphs)]
    for lineno, line in enumerate(_read_lines(adj_path), start=1):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{adj_path}:{lineno}: expected 'u, v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"{adj_path}:{lineno}: non-integer node id: {line!r}")
        if not (1 <= u <= n_nodes_total and 1 <= v <= n_nodes_total):
            raise FormatError(f"{adj_path}:{lineno}: node id out of range: {line!r}")
        gu, gv = node_graph[u - 1], node_graph[v - 1]
        if gu != gv:
            raise FormatError(
                f"{adj_path}:{lineno}: edge ({u},{v}) joins nodes of graphs "
                f"{gu + 1} and {gv + 1}")
        if u == v:
            continue  # stray self-loops in the file are dropped
        a, b = int(local_id[u - 1]), int(local_id[v - 1])
        key = (min(a, b), max(a, b))
        if key in seen[gu]:
            continue  # the reverse direction of an already-seen edge
        seen[gu].add(key)
        edge_lists[gu].append(key)

    node_labels_per_graph = [None] * n_graphs
    nl_path = directory / f"{name}_node_labels.txt"
    if nl_path.is_file():
        raw = []
        for lineno, line in enumerate(_read_lines(nl_path), start=1):
            if not line:
                continue
            try:
                raw.append(int(float(line)))
            except ValueError:
                raise FormatError(f"{nl_path}:{lineno}: not a node label: {line!r}")
        if len(raw) != n_nodes_total:
            raise FormatError(f"{nl_path}: {len(raw)} labels for {n_nodes_total} nodes")
        raw = np.asarray(raw, dtype=np.int64)
        node_labels_per_graph = [raw[node_graph == g] for g in range(n_graphs)]
        all_node_labels = sorted(set(raw.tolist()))
        nl_index = {l: i for i, l in enumerate(all_node_labels)}

    attrs_per_graph = None
    na_path = directory / f"{name}_node_attributes.txt"
    if na_path.is_file():
        rows = []
        for lineno, line in enumerate(_read_lines(na_path), start=1):
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise FormatError(f"{na_path}:{lineno}: bad attribute row: {line!r}")
        if len(rows) != n_nodes_total:
            raise FormatError(f"{na_path}: {len(rows)} rows for {n_nodes_total} nodes")
        attr = np.asarray(rows, dtype=np.float64)
        attrs_per_graph = [attr[node_graph == g] for g in range(n_graphs)]

    graphs = []
    for g in range(n_graphs):
        n = int(node_counts[g])
        edges = np.asarray(edge_lists[g], dtype=np.int64).reshape(-1, 2)
        nl = node_labels_per_graph[g]
        if attrs_per_graph is not None:
            feats = attrs_per_graph[g]
        elif nl is not None:
            feats = np.zeros((n, len(all_node_labels)))
            for i, l in enumerate(nl):
                feats[i, nl_index[int(l)]] = 1.0
        else:
            feats = _degree_features(n, edges)
        graphs.append(Graph(n, edges, feats, labels[g], node_labels=nl))

    return Dataset(name=name, graphs=graphs, num_classes=len(classes))


def _degree_features(n: int, edges: np.ndarray) -> np.ndarray:
    """One-hot degree features, clipped into DEGREE_FEATURE_BINS bins."""
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    feats = np.zeros((n, DEGREE_FEATURE_BINS))
    feats[np.arange(n), np.minimum(deg, DEGREE_FEATURE_BINS - 1)] = 1.0
    return feats


def write_tu_dataset(dataset: Dataset, directory, name: Optional[str] = None) -> None:
    """Write ``dataset`` back out in TUDataset text format (round-trippable)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = name or dataset.name
    offsets = []
    total = 0
    for g in dataset.graphs:
        offsets.append(total)
        total += g.node_count
    with open(directory / f"{name}_graph_indicator.txt", "w") as fh:
        for gi, g in enumerate(dataset.graphs, start=1):
            for _ in range(g.node_count):
                fh.write(f"{gi}\n")
    with open(directory / f"{name}_graph_labels.txt", "w") as fh:
        for g in dataset.graphs:
            fh.write(f"{g.graph_label}\n")
    with open(directory / f"{name}_A.txt", "w") as fh:
        for off, g in zip(offsets, dataset.graphs):
            for u, v in g.edges:
                fh.write(f"{off + u + 1}, {off + v + 1}\n")
                fh.write(f"{off + v + 1}, {off + u + 1}\n")
    if all(g.node_labels is not None for g in dataset.graphs):
        with open(directory / f"{name}_node_labels.txt", "w") as fh:
            for g in dataset.graphs:
                for l in g.node_labels:
                    fh.write(f"{int(l)}\n")
    with open(directory / f"{name}_node_attributes.txt", "w") as fh:
        for g in dataset.graphs:
            for row in g.node_features:
                fh.write(", ".join(repr(float(x)) for x in row) + "\n")


class NormalizedAdjacency:
    """Symmetrically normalized adjacency with self-loops, plus a power cache.

    A_hat = D_tilde^{-1/2} (A + I) D_tilde^{-1/2} where D_tilde is the degree
    matrix of A + I. Powers A_hat^tau are memoized; the cache is guarded by a
    lock so instances can be shared across threads.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("normalized adjacency must be square")
        self.matrix = matrix
        self._powers = {0: np.eye(matrix.shape[0]), 1: matrix}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def power(self, tau: int) -> np.ndarray:
        """A_hat^tau, memoized."""
        if tau < 0:
            raise ValueError("tau must be >= 0")
        with self._lock:
            return self._power_nolock(tau)

    def _power_nolock(self, tau: int) -> np.ndarray:
        if tau not in self._powers:
            half = self._power_nolock(tau // 2)
            result = half @ half
            if tau % 2:
                result = result @ self.matrix
            self._powers[tau] = result
        return self._powers[tau]


def normalized_adjacency(graph: Graph) -> NormalizedAdjacency:
    """Build the symmetric normalized adjacency of ``graph`` with self-loops."""
    a_tilde = graph.adjacency() + np.eye(graph.node_count)
    d_tilde = a_tilde.sum(axis=1)
    d_inv_sqrt = 1.0 / np.sqrt(d_tilde)
    a_hat = a_tilde * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]
    return NormalizedAdjacency(a_hat)


def adjacency_power(adj: NormalizedAdjacency, tau: int) -> np.ndarray:
    """A_hat^tau (tau >= 0), served from the instance's memo cache."""
    return adj.power(tau)
