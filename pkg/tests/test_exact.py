import numpy as np
import pytest

from edbsmatch.exact import (chi_square_uniform, check_fractional_bound,
                             enumerate_augmenting_paths, max_matching_exact,
                             offline_layered)
from edbsmatch.graphs import Graph, generate

from conftest import adjacency_of


def test_exact_matching_named_graphs(petersen):
    assert max_matching_exact(generate("complete", {"n": 4}, 0)).size == 2
    assert max_matching_exact(generate("star", {"n": 8}, 0)).size == 1
    assert max_matching_exact(petersen).size == 5
    em = max_matching_exact(petersen)
    assert em.certified
    seen = set()
    for u, v in em.edges:
        assert u not in seen and v not in seen
        seen.update((u, v))


def test_exact_matching_against_reference():
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(0)
    for trial in range(60):
        n = int(rng.integers(2, 70))
        p = float(rng.uniform(0.02, 0.4))
        g = generate("erdos-renyi", {"n": n, "p": p}, seed=trial)
        ref = nx.Graph()
        ref.add_nodes_from(range(n))
        ref.add_edges_from(g.edges())
        expect = len(nx.max_weight_matching(ref, maxcardinality=True))
        assert max_matching_exact(g).size == expect


def test_exact_matching_cap():
    g = Graph(3, [(0, 1)])
    with pytest.raises(ValueError):
        max_matching_exact(g, cap=2)


def test_augmenting_path_enumeration_basics():
    # path 0-1-2-3 with middle edge matched: one augmenting 3-edge path
    adj = [[1], [0, 2], [1, 3], [2]]
    match = {1: 2, 2: 1}
    got = enumerate_augmenting_paths(adj, match, 3)
    assert got == [(0, 1, 2, 3)]
    # no length-1 augmenting path exists (the only free pair is not adjacent)
    assert enumerate_augmenting_paths(adj, match, 1) == []


def test_offline_layered_hand_cases():
    st = offline_layered([[1], [0]], 1, lambda i, k: 0)
    assert st.matchings[0] == {(0, 1)}

    adj = [[1], [0, 2], [1, 3], [2]]
    ranks = {(1, 2): 0, (0, 1): 5, (2, 3): 6}

    def rank_of(i, key):
        return ranks.get(key, 99) if i == 1 else 7

    st = offline_layered(adj, 2, rank_of)
    assert st.matchings[0] == {(1, 2)}
    assert st.matchings[1] == {(0, 1), (2, 3)}


def test_offline_layered_ratio_and_validity():
    rng = np.random.default_rng(1)
    for trial in range(100):
        n = int(rng.integers(6, 40))
        g = generate("erdos-renyi", {"n": n, "p": float(rng.uniform(0.05, 0.3))},
                     seed=trial + 50)
        mu = max_matching_exact(g).size
        if mu == 0:
            continue
        k = int(rng.integers(1, 4))
        st = offline_layered(adjacency_of(g), k,
                             lambda i, key: hash((trial, i, key)) & 0xFFFFFFFF,
                             mu_exact=mu)
        m_final = st.final_matching()
        assert len(m_final) >= k / (k + 1) * mu - 1e-9
        seen = set()
        for u, v in m_final:
            assert g.has_edge(u, v)
            assert u not in seen and v not in seen
            seen.update((u, v))


def test_chi_square_uniform():
    assert chi_square_uniform([100] * 10) > 0.99
    assert chi_square_uniform([1000, 0, 0, 0, 0, 0, 0, 0, 0, 0]) < 1e-6
    with pytest.raises(ValueError):
        chi_square_uniform([2, 2, 2])


def test_fractional_bound_examples():
    tri = generate("cycle", {"n": 3}, 0)
    assert check_fractional_bound(tri, {e: 0.5 for e in tri.edges()}, mu=1)
    pm = Graph(6, [(0, 1), (2, 3), (4, 5)])
    assert check_fractional_bound(pm, {e: 1.0 for e in pm.edges()}, mu=3)
    # overloading a vertex invalidates the assignment
    p3 = Graph(3, [(0, 1), (1, 2)])
    assert not check_fractional_bound(p3, {(0, 1): 0.8, (1, 2): 0.8}, mu=1)
    with pytest.raises(ValueError):
        check_fractional_bound(p3, {(0, 2): 1.0}, mu=1)
