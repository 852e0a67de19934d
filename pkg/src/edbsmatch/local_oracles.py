"""Local computation oracles for matchings: answer per-edge and per-vertex
membership questions about a fixed randomized matching without building it.

The matching in question is the layered object of :func:`edbsmatch.exact.
offline_layered`: level i eliminates a greedy-by-rank maximal set of
vertex-disjoint augmenting paths of edge length 2i-1.  Level 1 is the
rank-greedy maximal matching, i.e. the greedy independent set of the line
graph; level k is a k/(k+1)-approximate maximum matching.

Two evaluation engines answer the same queries:

* a recursive engine that explores only what a query needs (membership of
  an edge at level i reduces to path enumeration around it, augmenting
  checks one level down, and greedy-independent-set membership among
  vertex-sharing paths), and
* a component engine that materializes the connected component of the
  queried vertex through the adjacency view and replays the layered process
  on it exactly, with an early stop once the component matching is maximum.

Both are driven by the same hash-based rank source, so their answers agree
edge for edge; the recursive engine is the one whose work stays local, the
component engine is the one that is fast when components fit in memory.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .exact import (PathEnumerationCap, canonical_path, maximum_matching_adj,
                    offline_layered)
from .seeding import SeedSource

__all__ = [
    "ResourceCapError",
    "RankSource",
    "OracleStats",
    "MatchingOracleSession",
    "greedy_mis_member",
    "enumerate_paths_containing_edge",
    "enumerate_paths_sharing_vertex",
    "estimate_matching_size",
    "coarse_matching_estimate",
    "EstimateValue",
]


class ResourceCapError(RuntimeError):
    """An oracle query tree exceeded its configured work budget."""


class RankSource:
    """Pseudorandom 64-bit ranks per (level, element), pure in the run seed.

    Ranks are hashes, not memoized draws, so the order in which elements
    are first asked for their rank cannot change any rank.  Ties are broken
    by the element key itself at comparison sites.
    """

    def __init__(self, seed_source: SeedSource):
        self._key = seed_source.key_bytes("ranks")
        self._memo: dict[tuple[int, tuple[int, ...]], int] = {}

    def rank(self, level: int, element: tuple[int, ...]) -> int:
        got = self._memo.get((level, element))
        if got is None:
            h = hashlib.blake2b(digest_size=8, key=self._key)
            h.update(struct.pack("<i", level))
            h.update(struct.pack(f"<{len(element)}q", *element))
            got = int.from_bytes(h.digest(), "little")
            self._memo[(level, element)] = got
        return got


@dataclass
class OracleStats:
    """Per-kind/level call counts plus total tree size for one session."""

    calls: dict[tuple[str, int], int] = field(default_factory=dict)
    tree_nodes: int = 0
    components_simulated: int = 0

    def bump(self, kind: str, level: int) -> None:
        key = (kind, level)
        self.calls[key] = self.calls.get(key, 0) + 1
        self.tree_nodes += 1


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# -- generic greedy independent-set membership ---------------------------------


def greedy_mis_member(element, neighbors_fn, rank_key_fn, memo: dict,
                      charge=None) -> bool:
    """Membership of ``element`` in the greedy independent set.

    The greedy set scans elements by increasing ``rank_key_fn`` and keeps an
    element iff none of its earlier-ranked neighbors was kept.  Evaluation
    is iterative (explicit stack), so long dependency chains cannot blow the
    interpreter recursion limit.
    """
    if element in memo:
        return memo[element]
    stack = [element]
    cursors: dict = {}
    while stack:
        x = stack[-1]
        if x in memo:
            stack.pop()
            continue
        state = cursors.get(x)
        if state is None:
            if charge is not None:
                charge()
            mine = rank_key_fn(x)
            lower = sorted((y for y in neighbors_fn(x) if rank_key_fn(y) < mine),
                           key=rank_key_fn)
            state = [lower, 0]
            cursors[x] = state
        lower, idx = state
        resolved = True
        while state[1] < len(lower):
            y = lower[state[1]]
            known = memo.get(y)
            if known is None:
                stack.append(y)
                resolved = False
                break
            if known:
                memo[x] = False
                cursors.pop(x)
                stack.pop()
                resolved = False
                break
            state[1] += 1
        if resolved:
            memo[x] = True
            cursors.pop(x)
            stack.pop()
    return memo[element]


# -- path enumeration over an adjacency view -----------------------------------


def _simple_paths_from(view, start: int, edges: int,
                       forbidden: frozenset[int] | set[int],
                       charge=None) -> list[tuple[int, ...]]:
    """All simple paths with ``edges`` edges starting at ``start`` that avoid
    ``forbidden`` vertices (``start`` itself excepted)."""
    out: list[tuple[int, ...]] = []

    def walk(path: list[int], left: int) -> None:
        if charge is not None:
            charge()
        if left == 0:
            out.append(tuple(path))
            return
        for w in view.neighbors(path[-1]):
            if w in forbidden or w in path:
                continue
            path.append(w)
            walk(path, left - 1)
            path.pop()

    walk([start], edges)
    return out


def enumerate_paths_containing_edge(view, edge: tuple[int, int], length: int,
                                    charge=None) -> list[tuple[int, ...]]:
    """Canonical keys of all simple ``length``-edge paths through an edge.

    Deterministic output order (sorted keys); exhaustive search costing
    O(length * Delta^(length-1)) neighbor reads.
    """
    u, v = edge
    found: set[tuple[int, ...]] = set()
    for left_len in range(length):
        right_len = length - 1 - left_len
        for pre in _simple_paths_from(view, u, left_len, frozenset((v,)), charge):
            blocked = frozenset(pre)
            for suf in _simple_paths_from(view, v, right_len, blocked, charge):
                found.add(canonical_path(pre[::-1] + suf))
    return sorted(found)


def enumerate_paths_sharing_vertex(view, path: tuple[int, ...], length: int,
                                   charge=None) -> list[tuple[int, ...]]:
    """Canonical keys of all simple ``length``-edge paths meeting ``path``."""
    found: set[tuple[int, ...]] = set()
    for w in path:
        for left_len in range(length + 1):
            right_len = length - left_len
            for pre in _simple_paths_from(view, w, left_len, frozenset(), charge):
                blocked = frozenset(pre) - {w}
                for suf in _simple_paths_from(view, w, right_len, blocked, charge):
                    candidate = pre[::-1] + suf[1:]
                    if len(set(candidate)) == len(candidate):
                        found.add(canonical_path(candidate))
    found.discard(canonical_path(path))
    return sorted(found)


# -- the oracle session ---------------------------------------------------------


class MatchingOracleSession:
    """One run's worth of consistent matching-membership answers.

    All queries within a session refer to the same layered matching,
    pinned by the session's seed.  Memo tables, the component cache, and
    the stats object live for the session.
    """

    def __init__(self, view, levels: int, seed_source: SeedSource, *,
                 engine: str = "auto",
                 component_cap: int = 500_000,
                 node_cap: int = 10_000_000,
                 visit_cap: int = 20_000_000,
                 use_memo: bool = True,
                 trace: list | None = None):
        if levels < 1:
            raise ValueError("need at least one level")
        if engine not in ("auto", "component", "recursive"):
            raise ValueError(f"unknown engine {engine!r}")
        self.view = view
        self.levels = levels
        self.ranks = RankSource(seed_source)
        self.engine = engine
        self.component_cap = component_cap
        self.node_cap = node_cap
        self.visit_cap = visit_cap
        self.use_memo = use_memo
        self.trace = trace
        self.stats = OracleStats()
        self._memo_edge: dict[tuple[int, tuple[int, int]], bool] = {}
        self._memo_aug: dict[tuple[int, tuple[int, ...]], bool] = {}
        self._memo_free: dict[tuple[int, int], bool] = {}
        self._memo_mis: list[dict] = [dict() for _ in range(levels + 1)]
        self._component_root: dict[int, int] = {}
        self._components: dict[int, list[int]] = {}
        self._component_mstatus: dict[int, tuple[set[int], set[tuple[int, int]]]] = {}
        self._budget = node_cap

    # -- bookkeeping ------------------------------------------------------

    def _charge(self, kind: str = "node", level: int = 0) -> None:
        self._budget -= 1
        if self._budget < 0:
            raise ResourceCapError(f"oracle work exceeded node cap {self.node_cap}")
        if kind != "node":
            self.stats.bump(kind, level)
            if self.trace is not None:
                self.trace.append((kind, level))

    def reset_memo(self) -> None:
        self._memo_edge.clear()
        self._memo_aug.clear()
        self._memo_free.clear()
        for d in self._memo_mis:
            d.clear()

    def _rank_key(self, level: int):
        rank = self.ranks.rank
        return lambda p: (rank(level, p), p)

    # -- recursive engine ---------------------------------------------------

    def edge_matched_recursive(self, edge: tuple[int, int], level: int | None = None) -> bool:
        """Membership of an edge in the level-``level`` matching."""
        i = self.levels if level is None else level
        return self._edge_matched(i, _edge_key(*edge))

    def _edge_matched(self, i: int, ekey: tuple[int, int]) -> bool:
        if i == 0:
            return False
        hit = self._memo_edge.get((i, ekey))
        if hit is not None:
            return hit
        self._charge("edge-matched", i)
        prev = self._edge_matched(i - 1, ekey)
        flipped = False
        for p in enumerate_paths_containing_edge(self.view, ekey, 2 * i - 1,
                                                 self._path_charge):
            if self._path_augmenting(i, p) and self._path_selected(i, p):
                flipped = True
                break  # selected paths are vertex-disjoint: at most one holds e
        result = prev != flipped
        if self.use_memo:
            self._memo_edge[(i, ekey)] = result
        return result

    def _path_charge(self) -> None:
        self._budget -= 1
        if self._budget < 0:
            raise ResourceCapError(f"oracle work exceeded node cap {self.node_cap}")

    def _path_augmenting(self, i: int, pkey: tuple[int, ...]) -> bool:
        """Is this (2i-1)-edge path augmenting for the level-(i-1) matching?"""
        if i == 1:
            return True
        hit = self._memo_aug.get((i, pkey))
        if hit is not None:
            return hit
        self._charge("path-augmenting", i)
        ok = True
        for j in range(len(pkey) - 1):
            ekey = _edge_key(pkey[j], pkey[j + 1])
            need = (j % 2 == 1)  # 0-based: odd index -> matched edge expected
            if self._edge_matched(i - 1, ekey) != need:
                ok = False
                break
        if ok:
            ok = self._vertex_free(i - 1, pkey[0]) and self._vertex_free(i - 1, pkey[-1])
        if self.use_memo:
            self._memo_aug[(i, pkey)] = ok
        return ok

    def _vertex_free(self, i: int, v: int) -> bool:
        if i == 0:
            return True
        hit = self._memo_free.get((i, v))
        if hit is not None:
            return hit
        self._charge("vertex-free", i)
        free = True
        for u in self.view.neighbors(v):
            if self._edge_matched(i, _edge_key(v, u)):
                free = False
                break
        if self.use_memo:
            self._memo_free[(i, v)] = free
        return free

    def _path_selected(self, i: int, pkey: tuple[int, ...]) -> bool:
        """Greedy-independent-set membership among level-i augmenting paths."""
        self._charge("path-selected", i)

        def neighbors_fn(q: tuple[int, ...]):
            return (r for r in enumerate_paths_sharing_vertex(
                self.view, q, 2 * i - 1, self._path_charge)
                if self._path_augmenting(i, r))

        memo = self._memo_mis[i] if self.use_memo else {}
        return greedy_mis_member(pkey, neighbors_fn, self._rank_key(i), memo,
                                 charge=self._path_charge)

    # -- component engine ---------------------------------------------------

    def _discover_component(self, v: int) -> list[int] | None:
        root = self._component_root.get(v)
        if root is not None:
            return None if root == -1 else self._components[root]
        seen = {v}
        frontier = [v]
        while frontier:
            if len(seen) > self.component_cap:
                self._component_root[v] = -1
                return None
            nxt: list[int] = []
            for x in frontier:
                for u in self.view.neighbors(x):
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        comp = sorted(seen)
        root = comp[0]
        for x in comp:
            self._component_root[x] = root
        self._components[root] = comp
        return comp

    def _simulate_component(self, comp: list[int]) -> tuple[set[int], set[tuple[int, int]]]:
        root = comp[0]
        cached = self._component_mstatus.get(root)
        if cached is not None:
            return cached
        index = {x: i for i, x in enumerate(comp)}
        local_adj = [[index[u] for u in self.view.neighbors(x) if u in index]
                     for x in comp]
        local_mu = sum(1 for x in maximum_matching_adj(local_adj) if x != -1) // 2

        def rank_of(level: int, local_path: tuple[int, ...]) -> int:
            # comp is sorted, so local->global is order-preserving and the
            # canonical orientation survives the mapping
            return self.ranks.rank(level, tuple(comp[i] for i in local_path))

        state = offline_layered(local_adj, self.levels, rank_of,
                                mu_exact=local_mu, visit_cap=self.visit_cap)
        matched_edges = {(comp[a], comp[b]) for a, b in state.final_matching()}
        matched_vertices = {x for e in matched_edges for x in e}
        result = (matched_vertices, matched_edges)
        self._component_mstatus[root] = result
        self.stats.components_simulated += 1
        return result

    # -- public query surface ------------------------------------------------

    def edge_matched(self, edge: tuple[int, int]) -> bool:
        ekey = _edge_key(*edge)
        if self.engine in ("auto", "component"):
            comp = self._discover_component(ekey[0])
            if comp is not None:
                _, medges = self._simulate_component(comp)
                return ekey in medges
            if self.engine == "component":
                raise ResourceCapError(
                    f"component around {ekey[0]} exceeds cap {self.component_cap}")
        return self.edge_matched_recursive(ekey)

    def vertex_matched(self, v: int) -> bool:
        """Is v covered by the level-k matching?  Queries all incident edges."""
        if self.engine in ("auto", "component"):
            comp = self._discover_component(v)
            if comp is not None:
                mvertices, _ = self._simulate_component(comp)
                return v in mvertices
            if self.engine == "component":
                raise ResourceCapError(
                    f"component around {v} exceeds cap {self.component_cap}")
        return not self._vertex_free(self.levels, v)

    def mis_member(self, v: int) -> bool:
        """Greedy maximal-independent-set membership for a graph vertex.

        Uses the level-0 rank stream over single-vertex keys; independent of
        the matching oracles.
        """
        self._charge("mis-member", 0)
        return greedy_mis_member(
            v,
            lambda x: self.view.neighbors(x),
            lambda x: (self.ranks.rank(0, (x,)), x),
            self._memo_mis[0] if self.use_memo else {},
            charge=self._path_charge,
        )


# -- estimators -----------------------------------------------------------------


@dataclass
class EstimateValue:
    value: float
    samples: int
    hits: int
    levels: int
    stats: OracleStats


def estimate_matching_size(view, n_universe: int, delta_eff: float,
                           epsilon: float, scale: float,
                           seed_source: SeedSource, *,
                           levels: int | None = None,
                           engine: str = "auto",
                           component_cap: int = 500_000,
                           node_cap: int = 10_000_000,
                           visit_cap: int = 20_000_000) -> EstimateValue:
    """Matching-size estimate from sampled vertex matched-status.

    Samples T = ceil(scale * delta_eff * ln(n) * 1e5 / eps^2) vertices with
    repetition, asks each for its status under the level-ceil(8/eps)
    matching, and returns hits * n * (1 - eps/2) / (2T).  The downward
    (1 - eps/2) shading buys the one-sided guarantee: the estimate stays at
    or below the true matching size while losing at most a (1+eps) factor.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    k = levels if levels is not None else math.ceil(8.0 / epsilon)
    t = max(1, math.ceil(scale * max(delta_eff, 1.0)
                         * math.log(max(n_universe, 2)) * 1e5 / epsilon**2))
    session = MatchingOracleSession(view, k, seed_source.child("final-estimate"),
                                    engine=engine, component_cap=component_cap,
                                    node_cap=node_cap, visit_cap=visit_cap)
    rng = seed_source.rng("final-estimate-draws")
    hits = 0
    for v in rng.integers(0, n_universe, size=t):
        if session.vertex_matched(int(v)):
            hits += 1
    value = hits * n_universe * (1.0 - epsilon / 2.0) / (2.0 * t)
    return EstimateValue(value=value, samples=t, hits=hits, levels=k,
                         stats=session.stats)


def coarse_matching_estimate(view, n_universe: int, epsilon: float, scale: float,
                             seed_source: SeedSource, *,
                             engine: str = "auto",
                             component_cap: int = 500_000,
                             node_cap: int = 10_000_000,
                             visit_cap: int = 20_000_000) -> EstimateValue:
    """Lower-bound estimate lam with lam <= mu <= (2+eps)*lam (whp).

    Estimates the size of the rank-greedy maximal matching (level 1) by
    adaptive vertex sampling: draw until ceil(scale * (100/eps^2) * ln n)
    matched vertices are seen or the draw budget n * that runs out.  The
    maximal matching is at least half of maximum, and the (1 - eps/8)
    shading keeps the estimate below it.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    session = MatchingOracleSession(view, 1, seed_source.child("coarse-estimate"),
                                    engine=engine, component_cap=component_cap,
                                    node_cap=node_cap, visit_cap=visit_cap)
    rng = seed_source.rng("coarse-estimate-draws")
    ln_n = math.log(max(n_universe, 2))
    target = max(8, math.ceil(scale * (100.0 / epsilon**2) * ln_n))
    budget = max(64, n_universe * target)
    hits = 0
    drawn = 0
    while drawn < budget and hits < target:
        batch = rng.integers(0, n_universe, size=min(256, budget - drawn))
        for v in batch:
            drawn += 1
            if session.vertex_matched(int(v)):
                hits += 1
                if hits >= target:
                    break
    if hits == 0:
        return EstimateValue(value=0.0, samples=drawn, hits=0, levels=1,
                             stats=session.stats)
    value = (hits / drawn) * n_universe * (1.0 - epsilon / 8.0) / 2.0
    return EstimateValue(value=value, samples=drawn, hits=hits, levels=1,
                         stats=session.stats)
