import numpy as np
import pytest

from locex.graph import Graph, load_edge_list

B6_TEXT = "1 2\n2 3\n1 3\n3 4\n4 5\n5 6\n4 6\n"


@pytest.fixture
def b6() -> Graph:
    """Two triangles {1,2,3} and {4,5,6} joined by the bridge 3-4."""
    return load_edge_list(B6_TEXT)


@pytest.fixture
def triangle() -> Graph:
    return load_edge_list("a b\nb c\nc a\n")


def idx(g: Graph, *labels) -> list[int]:
    return [g.index_of(str(lab)) for lab in labels]


def random_graph(rng: np.random.Generator, n: int, p: float, weighted: bool = False) -> Graph:
    """Erdos-Renyi graph with at least one edge."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    if not keep.any():
        keep[rng.integers(iu.size)] = True
    w = rng.uniform(0.5, 3.0, keep.sum()) if weighted else None
    return Graph.from_edges(n, iu[keep], ju[keep], w)


def dense_adjacency(g: Graph) -> np.ndarray:
    return g.adjacency.toarray()
