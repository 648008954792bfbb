import numpy as np
import pytest

from topotensor.graphs import Graph


def make_graph(n, edges, label=0, features=None):
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    if features is None:
        features = np.ones((n, 1))
    return Graph(n, edges, features, label)


def random_graph(rng, n_min=2, n_max=8, p=0.4, label=0):
    n = int(rng.integers(n_min, n_max + 1))
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < p]
    return make_graph(n, edges, label=label)


def random_connected_graph(rng, n_min=2, n_max=8, extra_p=0.3, label=0):
    n = int(rng.integers(n_min, n_max + 1))
    # random spanning tree first, then extra edges
    edges = set()
    order = rng.permutation(n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        u, v = int(order[i]), int(order[j])
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra_p:
                edges.add((u, v))
    return make_graph(n, sorted(edges), label=label)


@pytest.fixture
def triangle_fixture_dir(tmp_path):
    """Minimal TUDataset directory: two triangle graphs, labels {1, -1}."""
    d = tmp_path / "TRI"
    d.mkdir()
    (d / "TRI_A.txt").write_text(
        "1, 2\n2, 1\n1, 3\n3, 1\n2, 3\n3, 2\n"
        "4, 5\n5, 4\n4, 6\n6, 4\n5, 6\n6, 5\n")
    (d / "TRI_graph_indicator.txt").write_text("1\n1\n1\n2\n2\n2\n")
    (d / "TRI_graph_labels.txt").write_text("1\n-1\n")
    (d / "TRI_node_labels.txt").write_text("0\n0\n1\n1\n0\n0\n")
    return d
