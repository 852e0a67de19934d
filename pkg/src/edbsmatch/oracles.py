"""Query-model adapters with exact per-kind query counters.

Estimation code sees the graph only through these two oracles:

* :class:`MatrixOracle` -- pair queries: is {u, v} an edge?
* :class:`ListOracle` -- positional queries: the i-th neighbor of v
  (1-based), or ``None`` past the degree.

Each single probe increments the matching counter by exactly one; the bulk
variants increment by the batch size.  Nothing here caches: an oracle call
always costs.  Caching layers (neighbor materialization for the local
oracles) live above, in :class:`CachedAdjacencyView`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph

__all__ = [
    "QueryCounters",
    "MatrixOracle",
    "ListOracle",
    "CachedAdjacencyView",
    "MatrixNeighborSource",
    "ListNeighborSource",
]


@dataclass
class QueryCounters:
    """Monotone counts of oracle calls, one bucket per query kind."""

    matrix_queries: int = 0
    list_queries: int = 0

    def snapshot(self) -> tuple[int, int]:
        return (self.matrix_queries, self.list_queries)

    def total(self) -> int:
        return self.matrix_queries + self.list_queries


class MatrixOracle:
    """Adjacency-matrix access to a graph, with counting."""

    def __init__(self, graph: Graph, counters: QueryCounters | None = None):
        self.graph = graph
        self.counters = counters if counters is not None else QueryCounters()
        self.n = graph.n

    def query(self, u: int, v: int) -> bool:
        n = self.n
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"vertex out of range: ({u}, {v}) with n={n}")
        if u == v:
            raise ValueError("matrix query requires two distinct vertices")
        self.counters.matrix_queries += 1
        return self.graph.has_edge(u, v)

    def query_pairs(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Probe many pairs at once; counts one query per pair."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.shape != vs.shape:
            raise ValueError("pair arrays must have equal shape")
        n = self.n
        if len(us) and (us.min() < 0 or us.max() >= n or vs.min() < 0 or vs.max() >= n):
            raise ValueError("vertex out of range in bulk matrix query")
        if np.any(us == vs):
            raise ValueError("matrix query requires two distinct vertices")
        self.counters.matrix_queries += len(us)
        return self.graph.dense_matrix()[us, vs]

    def query_row(self, v: int) -> np.ndarray:
        """All n-1 pair probes (v, u) for u != v; counts n-1 queries.

        Returns a length-n boolean row with position v forced False.
        """
        if not 0 <= v < self.n:
            raise ValueError(f"vertex out of range: {v}")
        self.counters.matrix_queries += self.n - 1
        row = self.graph.dense_matrix()[v].copy()
        row[v] = False
        return row


class ListOracle:
    """Adjacency-list access to a graph, with counting."""

    def __init__(self, graph: Graph, counters: QueryCounters | None = None):
        self.graph = graph
        self.counters = counters if counters is not None else QueryCounters()
        self.n = graph.n

    def query(self, v: int, i: int) -> tuple[int, int] | None:
        """The i-th edge at v (i is 1-based), or None when i exceeds deg(v)."""
        n = self.n
        if not 0 <= v < n:
            raise ValueError(f"vertex out of range: {v}")
        if not 1 <= i <= n:
            raise ValueError(f"list index must be in [1, {n}], got {i}")
        self.counters.list_queries += 1
        order = self.graph.neighbor_order(v)
        if i > len(order):
            return None
        return (v, int(order[i - 1]))

    def query_many(self, v: int, idxs: np.ndarray) -> np.ndarray:
        """Bulk positional probes at one vertex; -1 marks past-degree answers."""
        n = self.n
        if not 0 <= v < n:
            raise ValueError(f"vertex out of range: {v}")
        idxs = np.asarray(idxs, dtype=np.int64)
        if len(idxs) and (idxs.min() < 1 or idxs.max() > n):
            raise ValueError(f"list index out of [1, {n}] in bulk query")
        self.counters.list_queries += len(idxs)
        order = self.graph.neighbor_order(v)
        out = np.full(len(idxs), -1, dtype=np.int64)
        ok = idxs <= len(order)
        if ok.any():
            out[ok] = order[idxs[ok] - 1]
        return out


# -- neighbor materialization ------------------------------------------------


class MatrixNeighborSource:
    """Neighbor lists recovered through matrix probes: n-1 queries a vertex."""

    def __init__(self, oracle: MatrixOracle):
        self.oracle = oracle
        self.n = oracle.n

    def fetch(self, v: int) -> tuple[int, ...]:
        row = self.oracle.query_row(v)
        return tuple(int(u) for u in np.flatnonzero(row))


class ListNeighborSource:
    """Neighbor lists recovered through list probes.

    With a known degree this costs deg(v) queries; without one it first finds
    the degree by binary search on the past-degree boundary.
    """

    def __init__(self, oracle: ListOracle, degrees: np.ndarray | None = None):
        self.oracle = oracle
        self.n = oracle.n
        self.degrees = degrees

    def _degree(self, v: int) -> int:
        if self.degrees is not None:
            return int(self.degrees[v])
        lo, hi = 0, self.n
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.oracle.query(v, mid) is not None:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def fetch(self, v: int) -> tuple[int, ...]:
        deg = self._degree(v)
        if deg == 0:
            return ()
        got = self.oracle.query_many(v, np.arange(1, deg + 1))
        return tuple(int(u) for u in got)


class CachedAdjacencyView:
    """Adjacency access for the local oracles: materialize-once semantics.

    The first ``neighbors(v)`` pays the underlying oracle cost through the
    given source; repeated access is free.  This is the only caching layer
    in the query path, and it only ever reduces cost.
    """

    def __init__(self, source, n: int):
        self.source = source
        self.n = n
        self._cache: dict[int, tuple[int, ...]] = {}

    def neighbors(self, v: int) -> tuple[int, ...]:
        got = self._cache.get(v)
        if got is None:
            got = self.source.fetch(v)
            self._cache[v] = got
        return got

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def cached_vertices(self) -> int:
        return len(self._cache)
