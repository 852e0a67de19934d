"""Exact ground-truth oracles used by verification and tests.

Everything here works on explicit small graphs (adjacency lists in memory)
and is deliberately independent of the estimation paths it checks:

* :func:`max_matching_exact` -- maximum cardinality matching in a general
  graph via blossom contraction, self-certified by a final augmenting-path
  search from every exposed vertex.
* :func:`offline_layered` -- the deterministic layer-by-layer process that
  grows a matching by eliminating maximal sets of vertex-disjoint augmenting
  paths of odd lengths 1, 3, 5, ...; each level picks its path set greedily
  by externally supplied ranks.  This is the reference object the local
  matching oracles are tested against.
* :func:`chi_square_uniform` and :func:`check_fractional_bound` -- small
  statistical and combinatorial helpers.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy import stats as _scipy_stats

__all__ = [
    "ExactMatching",
    "max_matching_exact",
    "maximum_matching_adj",
    "OfflineLayeredState",
    "offline_layered",
    "enumerate_augmenting_paths",
    "PathEnumerationCap",
    "chi_square_uniform",
    "check_fractional_bound",
    "canonical_path",
]

DEFAULT_EXACT_CAP = 2000


class PathEnumerationCap(RuntimeError):
    """Raised when exhaustive path enumeration exceeds its work budget."""


@dataclass
class ExactMatching:
    edges: list[tuple[int, int]]
    size: int
    certified: bool

    def matched_vertices(self) -> set[int]:
        out: set[int] = set()
        for u, v in self.edges:
            out.add(u)
            out.add(v)
        return out


def _find_augmenting(adj: Sequence[Sequence[int]], match: list[int], root: int) -> bool:
    """One blossom-aware BFS phase; augments and returns True on success."""
    n = len(adj)
    parent = [-1] * n
    base = list(range(n))
    in_queue = [False] * n
    in_queue[root] = True
    queue = deque([root])

    def lca(a: int, b: int) -> int:
        seen = [False] * n
        x = a
        while True:
            x = base[x]
            seen[x] = True
            if match[x] == -1:
                break
            x = parent[match[x]]
        y = b
        while True:
            y = base[y]
            if seen[y]:
                return y
            y = parent[match[y]]

    def mark_path(v: int, b: int, child: int, in_blossom: list[bool]) -> None:
        while base[v] != b:
            in_blossom[base[v]] = True
            in_blossom[base[match[v]]] = True
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    while queue:
        v = queue.popleft()
        for to in adj[v]:
            if base[v] == base[to] or match[v] == to:
                continue
            if to == root or (match[to] != -1 and parent[match[to]] != -1):
                # odd cycle: contract the blossom at the lowest common ancestor
                cur_base = lca(v, to)
                in_blossom = [False] * n
                mark_path(v, cur_base, to, in_blossom)
                mark_path(to, cur_base, v, in_blossom)
                for i in range(n):
                    if in_blossom[base[i]]:
                        base[i] = cur_base
                        if not in_queue[i]:
                            in_queue[i] = True
                            queue.append(i)
            elif parent[to] == -1:
                parent[to] = v
                if match[to] == -1:
                    # augment along the alternating tree path
                    while to != -1:
                        prev = parent[to]
                        after = match[prev]
                        match[to] = prev
                        match[prev] = to
                        to = after
                    return True
                in_queue[match[to]] = True
                queue.append(match[to])
    return False


def maximum_matching_adj(adj: Sequence[Sequence[int]]) -> list[int]:
    """Maximum matching on an explicit adjacency structure; returns match[]."""
    n = len(adj)
    match = [-1] * n
    # greedy warm start cuts down blossom phases
    for v in range(n):
        if match[v] == -1:
            for u in adj[v]:
                if match[u] == -1:
                    match[v] = u
                    match[u] = v
                    break
    for v in range(n):
        if match[v] == -1:
            _find_augmenting(adj, match, v)
    return match


def max_matching_exact(graph_or_adj, cap: int = DEFAULT_EXACT_CAP) -> ExactMatching:
    """Maximum cardinality matching, certified by a no-augmenting-path pass.

    Accepts a :class:`~edbsmatch.graphs.Graph` or a raw adjacency sequence.
    """
    if hasattr(graph_or_adj, "neighbor_order"):
        g = graph_or_adj
        adj = [list(map(int, g.neighbor_order(v))) for v in range(g.n)]
    else:
        adj = [list(row) for row in graph_or_adj]
    n = len(adj)
    if n > cap:
        raise ValueError(f"instance size {n} exceeds exact-matching cap {cap}")

    match = maximum_matching_adj(adj)

    # certification: from every exposed vertex, the blossom search must fail
    certified = True
    for v in range(n):
        if match[v] == -1:
            probe = list(match)
            if _find_augmenting(adj, probe, v):
                certified = False
                break
    if not certified:
        raise AssertionError("matching failed self-certification (augmenting path found)")

    edges = sorted({(min(v, match[v]), max(v, match[v])) for v in range(n) if match[v] != -1})
    return ExactMatching(edges=edges, size=len(edges), certified=True)


# -- layered augmenting-path process ------------------------------------------


def canonical_path(vertices: tuple[int, ...]) -> tuple[int, ...]:
    """One key per undirected path: the lexicographically smaller orientation."""
    rev = vertices[::-1]
    return vertices if vertices <= rev else rev


def enumerate_augmenting_paths(adj: Sequence[Sequence[int]], match: dict[int, int],
                               length_edges: int, visit_cap: int = 20_000_000
                               ) -> list[tuple[int, ...]]:
    """All augmenting paths with exactly ``length_edges`` edges (odd).

    ``match`` maps matched vertices to their partners.  Paths alternate
    unmatched/matched edges, start and end at exposed vertices, and are
    returned as canonical vertex tuples without duplicates.

    Branching only happens on the unmatched steps, so the search from one
    exposed vertex costs at most O(Delta^((L+1)/2)) visits; ``visit_cap``
    bounds the total and raises :class:`PathEnumerationCap` beyond it.
    """
    if length_edges % 2 == 0 or length_edges < 1:
        raise ValueError("augmenting paths have odd edge length")
    n = len(adj)
    free = [v for v in range(n) if v not in match]
    found: set[tuple[int, ...]] = set()
    visits = 0

    def extend(path: list[int], on_path: set[int], edges_left: int) -> None:
        nonlocal visits
        u = path[-1]
        if edges_left == 1:
            for w in adj[u]:
                visits += 1
                if visits > visit_cap:
                    raise PathEnumerationCap(
                        f"path enumeration exceeded {visit_cap} visits")
                if w in on_path or w in match:
                    continue
                found.add(canonical_path(tuple(path) + (w,)))
            return
        for w in adj[u]:
            visits += 1
            if visits > visit_cap:
                raise PathEnumerationCap(f"path enumeration exceeded {visit_cap} visits")
            if w in on_path:
                continue
            partner = match.get(w)
            if partner is None or partner == u or partner in on_path:
                continue
            # unmatched edge u-w, then the forced matched edge w-partner
            path.append(w)
            path.append(partner)
            on_path.add(w)
            on_path.add(partner)
            extend(path, on_path, edges_left - 2)
            on_path.discard(partner)
            on_path.discard(w)
            path.pop()
            path.pop()

    for s in free:
        extend([s], {s}, length_edges)
    return sorted(found)


@dataclass
class OfflineLayeredState:
    """Transcript of the layered process: per-level matchings and path sets."""

    levels: int
    matchings: list[set[tuple[int, int]]] = field(default_factory=list)
    path_sets: list[list[tuple[int, ...]]] = field(default_factory=list)
    stopped_at: int | None = None  # level after which the matching was maximum

    def final_matching(self) -> set[tuple[int, int]]:
        return self.matchings[-1]


def _path_edges(path: tuple[int, ...]) -> list[tuple[int, int]]:
    return [(min(a, b), max(a, b)) for a, b in zip(path, path[1:])]


def offline_layered(adj: Sequence[Sequence[int]], k: int,
                    rank_of: Callable[[int, tuple[int, ...]], int],
                    mu_exact: int | None = None,
                    visit_cap: int = 20_000_000) -> OfflineLayeredState:
    """Run the k-level augmenting-path elimination process.

    Level i eliminates a maximal set of vertex-disjoint augmenting paths of
    edge length 2i-1, chosen greedily in increasing ``rank_of(i, path_key)``
    order (ties broken by key).  Level 1 therefore produces the rank-greedy
    maximal matching.

    When ``mu_exact`` is supplied, levels after the matching reaches that
    size are skipped outright: a maximum matching admits no augmenting path
    of any length.
    """
    state = OfflineLayeredState(levels=k)
    match: dict[int, int] = {}

    for i in range(1, k + 1):
        current_size = len(match) // 2
        if mu_exact is not None and current_size >= mu_exact:
            if state.stopped_at is None:
                state.stopped_at = i - 1
            state.path_sets.append([])
            state.matchings.append({(min(u, v), max(u, v))
                                    for u, v in match.items() if u < v})
            continue
        candidates = enumerate_augmenting_paths(adj, match, 2 * i - 1, visit_cap)
        ordered = sorted(candidates, key=lambda p: (rank_of(i, p), p))
        used: set[int] = set()
        chosen: list[tuple[int, ...]] = []
        for path in ordered:
            if any(v in used for v in path):
                continue
            chosen.append(path)
            used.update(path)
        for path in chosen:
            edges_of_path = _path_edges(path)
            for j, (a, b) in enumerate(edges_of_path, start=1):
                if j % 2 == 0:  # matched edge leaves first
                    match.pop(a, None)
                    match.pop(b, None)
            for j, (a, b) in enumerate(edges_of_path, start=1):
                if j % 2 == 1:
                    match[a] = b
                    match[b] = a
        state.path_sets.append(chosen)
        state.matchings.append({(min(u, v), max(u, v)) for u, v in match.items() if u < v})
    return state


# -- small statistical helpers -------------------------------------------------


def chi_square_uniform(counts: Sequence[int]) -> float:
    """p-value of a chi-square test against the uniform distribution."""
    counts = list(counts)
    if len(counts) < 2:
        raise ValueError("need at least two cells")
    total = sum(counts)
    if total / len(counts) < 5:
        raise ValueError("underpowered input: expected count below 5 per cell")
    return float(_scipy_stats.chisquare(counts).pvalue)


def check_fractional_bound(g, weights: dict[tuple[int, int], float],
                           mu: int | None = None) -> bool:
    """Validate a fractional matching and its 3/2-of-maximum size bound."""
    load = [0.0] * g.n
    size = 0.0
    for (u, v), w in weights.items():
        if not g.has_edge(u, v):
            raise ValueError(f"({u}, {v}) is not an edge")
        if w < 0:
            raise ValueError("negative weight")
        load[u] += w
        load[v] += w
        size += w
    if any(x > 1.0 + 1e-9 for x in load):
        return False
    if mu is None:
        mu = max_matching_exact(g).size
    return size <= 1.5 * mu + 1e-9
