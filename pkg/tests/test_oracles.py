import numpy as np
import pytest

from edbsmatch.graphs import Graph, generate
from edbsmatch.oracles import (CachedAdjacencyView, ListNeighborSource,
                               ListOracle, MatrixNeighborSource, MatrixOracle,
                               QueryCounters)


def test_matrix_query_examples():
    k3 = generate("complete", {"n": 3}, 0)
    o = MatrixOracle(k3)
    assert o.query(0, 1) is True
    empty = Graph(3, [])
    o2 = MatrixOracle(empty)
    assert o2.query(0, 1) is False
    assert o2.counters.matrix_queries == 1


def test_matrix_query_error_cases():
    o = MatrixOracle(generate("complete", {"n": 3}, 0))
    with pytest.raises(ValueError):
        o.query(0, 0)
    with pytest.raises(ValueError):
        o.query(0, 3)
    assert o.counters.matrix_queries == 0  # failed calls do not count


def test_matrix_replay_reconstructs_adjacency():
    g = generate("erdos-renyi", {"n": 20, "p": 0.3}, seed=11)
    o = MatrixOracle(g)
    pairs = [(u, v) for u in range(20) for v in range(u + 1, 20)]
    answers = {p: o.query(*p) for p in pairs}
    assert o.counters.matrix_queries == len(pairs) == 190
    for (u, v), ans in answers.items():
        assert ans == g.has_edge(u, v)


def test_list_query_examples():
    star = generate("star", {"n": 6}, 0)
    o = ListOracle(star)
    got = o.query(0, 1)
    assert got is not None and got[0] == 0 and 1 <= got[1] < 6
    deg = star.degree(2)
    assert o.query(2, deg + 1) is None
    with pytest.raises(ValueError):
        o.query(2, 0)
    with pytest.raises(ValueError):
        o.query(6, 1)


def test_list_replay_reconstructs_edges():
    g = generate("erdos-renyi", {"n": 18, "p": 0.25}, seed=4)
    o = ListOracle(g)
    seen = set()
    calls = 0
    for v in range(g.n):
        i = 1
        while True:
            got = o.query(v, i)
            calls += 1
            if got is None:
                break
            seen.add((min(got), max(got)))
            i += 1
    assert seen == set(g.edges())
    assert o.counters.list_queries == calls


def test_bulk_queries_count_per_probe():
    g = generate("erdos-renyi", {"n": 30, "p": 0.2}, seed=9)
    c = QueryCounters()
    mo = MatrixOracle(g, c)
    us = np.array([0, 1, 2, 3])
    vs = np.array([5, 6, 7, 8])
    got = mo.query_pairs(us, vs)
    assert c.matrix_queries == 4
    assert [bool(x) for x in got] == [g.has_edge(u, v) for u, v in zip(us, vs)]
    mo.query_row(5)
    assert c.matrix_queries == 4 + g.n - 1

    lo = ListOracle(g, c)
    out = lo.query_many(3, np.array([1, 2, g.n]))
    assert c.list_queries == 3
    assert out[-1] == -1 or g.degree(3) >= g.n


def test_cached_view_costs_once():
    g = generate("erdos-renyi", {"n": 25, "p": 0.3}, seed=2)
    c = QueryCounters()
    view = CachedAdjacencyView(MatrixNeighborSource(MatrixOracle(g, c)), g.n)
    first = view.neighbors(7)
    after_first = c.matrix_queries
    assert after_first == g.n - 1
    assert view.neighbors(7) == first
    assert c.matrix_queries == after_first
    assert sorted(first) == sorted(map(int, g.neighbor_order(7)))


def test_list_neighbor_source_uses_known_degrees():
    g = generate("erdos-renyi", {"n": 25, "p": 0.3}, seed=2)
    degs = np.array([g.degree(v) for v in range(g.n)])
    c = QueryCounters()
    view = CachedAdjacencyView(ListNeighborSource(ListOracle(g, c), degs), g.n)
    got = view.neighbors(4)
    assert c.list_queries == g.degree(4)
    assert list(got) == list(map(int, g.neighbor_order(4)))
