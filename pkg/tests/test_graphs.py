import math

import numpy as np
import pytest

from edbsmatch.graphs import Graph, generate, read_graph_file, stats, write_graph_file
from edbsmatch.seeding import SeedSource


def test_simple_and_symmetric():
    g = Graph(4, [(0, 1), (1, 0), (2, 3)])  # duplicate collapses
    assert g.m == 2
    assert g.has_edge(1, 0) and g.has_edge(3, 2)
    assert not g.has_edge(0, 2)
    for v in range(4):
        for u in g.neighbor_order(v):
            assert v in g.neighbor_order(int(u))


def test_rejects_self_loop_and_range():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 3)])


def test_stats_examples(petersen):
    k4 = generate("complete", {"n": 4}, 0)
    assert stats(k4) == (4, 6, 3, 3.0)
    empty = Graph(5, [])
    assert stats(empty) == (5, 0, 0, 0.0)
    assert stats(petersen) == (10, 15, 3, 3.0)


def test_generators_deterministic_in_seed():
    for kind, params in [("erdos-renyi", {"n": 40, "p": 0.2}),
                         ("d-regular", {"n": 40, "d": 4}),
                         ("random-bipartite", {"n_left": 15, "n_right": 15, "p": 0.3}),
                         ("hidden-perfect-matching", {"n": 10, "eps": 0.4})]:
        a = generate(kind, params, seed=9)
        b = generate(kind, params, seed=9)
        c = generate(kind, params, seed=10)
        assert set(a.edges()) == set(b.edges())
        assert [list(a.neighbor_order(v)) for v in range(a.n)] == \
               [list(b.neighbor_order(v)) for v in range(b.n)]
        if a.m > 0:
            assert set(a.edges()) != set(c.edges()) or \
                [list(a.neighbor_order(v)) for v in range(a.n)] != \
                [list(c.neighbor_order(v)) for v in range(c.n)]


def test_complete_generator():
    k4 = generate("complete", {"n": 4}, 0)
    assert k4.m == 6


def test_hidden_matching_structure():
    g = generate("hidden-perfect-matching", {"n": 10, "eps": 0.4}, seed=2)
    n_side, n_hub = 10, 2
    assert g.n == 2 * n_side + n_hub
    hub = list(range(2 * n_side, 2 * n_side + n_hub))
    # hub vertices connect to every non-hub vertex
    for h in hub:
        assert g.degree(h) == 2 * n_side
    # non-hub vertices: exactly one matching partner plus all hub vertices
    for v in range(2 * n_side):
        assert g.degree(v) == 1 + n_hub
        partners = [u for u in map(int, g.neighbor_order(v)) if u not in hub]
        assert len(partners) == 1
        side = 0 if v < n_side else 1
        assert (partners[0] < n_side) == (side == 1)


def test_erdos_renyi_edge_count_concentrates():
    n, p, seeds = 50, 0.1, 200
    mean_target = p * n * (n - 1) / 2
    sigma = math.sqrt(mean_target * (1 - p))
    ms = [generate("erdos-renyi", {"n": n, "p": p}, seed=s).m for s in range(seeds)]
    assert abs(np.mean(ms) - mean_target) <= 4 * sigma / math.sqrt(seeds)


def test_per_vertex_random_order_varies_but_is_seeded():
    g = generate("erdos-renyi", {"n": 30, "p": 0.5}, seed=5)
    sortedness = sum(list(g.neighbor_order(v)) == sorted(g.neighbor_order(v))
                     for v in range(g.n))
    assert sortedness < g.n // 2  # shuffled lists are rarely sorted
    h = generate("erdos-renyi", {"n": 30, "p": 0.5}, seed=5,
                 order_mode="global")
    assert all(list(h.neighbor_order(v)) == sorted(h.neighbor_order(v))
               for v in range(h.n))


def test_file_round_trip(tmp_path):
    g = generate("erdos-renyi", {"n": 25, "p": 0.2}, seed=3)
    path = tmp_path / "g.txt"
    write_graph_file(g, str(path))
    h = read_graph_file(str(path), order_seed=SeedSource(0))
    assert h.n == g.n and set(h.edges()) == set(g.edges())


def test_file_comments_and_validation(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a comment\n3 1\n0 2  # inline\n")
    g = read_graph_file(str(path))
    assert g.n == 3 and set(g.edges()) == {(0, 2)}
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n2 0\n")
    with pytest.raises(ValueError):
        read_graph_file(str(bad))
    short = tmp_path / "short.txt"
    short.write_text("3 2\n0 1\n")
    with pytest.raises(ValueError):
        read_graph_file(str(short))
