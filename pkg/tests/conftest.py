import pytest

from edbsmatch.graphs import Graph


class DirectView:
    """Adjacency access straight off an explicit structure (no counting)."""

    def __init__(self, adj):
        self._adj = [tuple(row) for row in adj]
        self.n = len(adj)

    def neighbors(self, v):
        return self._adj[v]


def adjacency_of(g: Graph):
    return [list(map(int, g.neighbor_order(v))) for v in range(g.n)]


@pytest.fixture
def petersen() -> Graph:
    edges = ([(i, (i + 1) % 5) for i in range(5)]
             + [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
             + [(i, 5 + i) for i in range(5)])
    return Graph(10, edges)
