"""Ground-truth graph storage, instance generators, and graph files.

A :class:`Graph` is an immutable simple undirected graph.  Estimators never
touch it directly: they go through the query oracles in
:mod:`edbsmatch.oracles`, which count every access.  The helpers here
(``stats``, ``edges``, adjacency matrix) exist for generation and for
verification code, not for estimation paths.

Neighbor order matters: an adjacency-list query (v, i) returns the i-th
neighbor in v's stored order.  Two order modes are supported:

* ``per-vertex-random`` -- each vertex's list is an independent seeded
  shuffle (the harder query model, the default),
* ``global`` -- neighbors sorted by vertex id everywhere.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

import numpy as np

from .seeding import SeedSource

__all__ = [
    "Graph",
    "generate",
    "stats",
    "read_graph_file",
    "write_graph_file",
    "GENERATOR_KINDS",
]

ORDER_MODES = ("per-vertex-random", "global")


class Graph:
    """Immutable simple undirected graph with fixed neighbor orders."""

    __slots__ = ("n", "_neighbors", "_edge_set", "order_mode", "_dense")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 order_mode: str = "per-vertex-random",
                 order_seed: SeedSource | None = None):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        if order_mode not in ORDER_MODES:
            raise ValueError(f"unknown order mode {order_mode!r}")
        adj: list[list[int]] = [[] for _ in range(n)]
        edge_set: set[int] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            a, b = (u, v) if u < v else (v, u)
            key = a * n + b
            if key in edge_set:
                continue
            edge_set.add(key)
            adj[a].append(b)
            adj[b].append(a)

        if order_mode == "global":
            neighbor_arrays = [np.array(sorted(row), dtype=np.int64) for row in adj]
        else:
            source = order_seed if order_seed is not None else SeedSource(0)
            neighbor_arrays = []
            for v, row in enumerate(adj):
                arr = np.array(sorted(row), dtype=np.int64)
                if len(arr) > 1:
                    source.rng(f"order-{v}").shuffle(arr)
                neighbor_arrays.append(arr)

        self.n = n
        self._neighbors = neighbor_arrays
        self._edge_set = frozenset(edge_set)
        self.order_mode = order_mode
        self._dense = None

    # -- structure ---------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self._edge_set)

    def degree(self, v: int) -> int:
        return len(self._neighbors[v])

    def neighbor_order(self, v: int) -> np.ndarray:
        """The fixed neighbor sequence answered by list queries (read-only)."""
        return self._neighbors[v]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        a, b = (u, v) if u < v else (v, u)
        return a * self.n + b in self._edge_set

    def edges(self) -> Iterator[tuple[int, int]]:
        n = self.n
        for key in sorted(self._edge_set):
            yield divmod(key, n)

    def edge_keys(self) -> frozenset[int]:
        """Packed u*n+v keys with u<v; for verification-side set algebra."""
        return self._edge_set

    def dense_matrix(self) -> np.ndarray:
        """Boolean adjacency matrix, built once on demand (oracle bulk path)."""
        if self._dense is None:
            mat = np.zeros((self.n, self.n), dtype=bool)
            for u, v in self.edges():
                mat[u, v] = True
                mat[v, u] = True
            self._dense = mat
        return self._dense

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(n={self.n}, m={self.m}, order={self.order_mode})"


def stats(g: Graph) -> tuple[int, int, int, float]:
    """Exact (n, m, max degree, average degree).

    Ground truth for verification only; estimators must not call this.
    """
    degs = [g.degree(v) for v in range(g.n)]
    max_deg = max(degs) if degs else 0
    return g.n, g.m, max_deg, 2.0 * g.m / g.n


# -- generators -------------------------------------------------------------

GENERATOR_KINDS = (
    "erdos-renyi",
    "random-bipartite",
    "hidden-perfect-matching",
    "d-regular",
    "path",
    "cycle",
    "star",
    "complete",
    "from-file",
)


def _gen_erdos_renyi(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    return list(zip(iu[mask].tolist(), ju[mask].tolist()))


def _gen_random_bipartite(n_left: int, n_right: int, p: float,
                          rng: np.random.Generator) -> list[tuple[int, int]]:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    left = np.repeat(np.arange(n_left), n_right)
    right = np.tile(np.arange(n_left, n_left + n_right), n_left)
    mask = rng.random(len(left)) < p
    return list(zip(left[mask].tolist(), right[mask].tolist()))


def _gen_hidden_perfect_matching(n_side: int, eps: float,
                                 rng: np.random.Generator) -> list[tuple[int, int]]:
    """Hard instance for list queries: a hidden perfect matching between two
    sides plus a small fully-connected hub set drowning it out.

    Vertices 0..n-1 are the left side, n..2n-1 the right side, and the last
    ceil(eps*n/2) vertices the hub.  The matching pairing is a seeded random
    permutation.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must be in (0, 1]")
    n_hub = max(1, math.ceil(eps * n_side / 2))
    perm = rng.permutation(n_side)
    edges = [(i, n_side + int(perm[i])) for i in range(n_side)]
    hub_start = 2 * n_side
    for h in range(hub_start, hub_start + n_hub):
        for v in range(2 * n_side):
            edges.append((v, h))
    return edges


def _gen_d_regular(n: int, d: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Pairing-model d-regular graph, repaired to simplicity by edge swaps."""
    if d < 0 or d >= n:
        raise ValueError("need 0 <= d < n")
    if (n * d) % 2 != 0:
        raise ValueError("n*d must be even for a d-regular graph")
    if d == 0:
        return []
    for _ in range(50):
        stubs = np.repeat(np.arange(n), d)
        rng.shuffle(stubs)
        pairs = [(int(a), int(b)) for a, b in stubs.reshape(-1, 2)]
        seen: set[tuple[int, int]] = set()
        bad: list[int] = []
        for idx, (u, v) in enumerate(pairs):
            e = (u, v) if u < v else (v, u)
            if u == v or e in seen:
                bad.append(idx)
            else:
                seen.add(e)
        # double-edge swaps: trade a bad pair against a random good pair
        budget = 200 * (len(bad) + 1)
        while bad and budget > 0:
            budget -= 1
            i = bad[-1]
            j = int(rng.integers(0, len(pairs)))
            if j == i or j in bad[-8:]:
                continue
            u, v = pairs[i]
            x, y = pairs[j]
            e1 = (min(u, x), max(u, x))
            e2 = (min(v, y), max(v, y))
            if u == x or v == y or e1 in seen or e2 in seen or e1 == e2:
                continue
            old = (min(x, y), max(x, y))
            seen.discard(old)
            if e1 in seen or e2 in seen:
                seen.add(old)
                continue
            pairs[i] = (u, x)
            pairs[j] = (v, y)
            seen.add(e1)
            seen.add(e2)
            bad.pop()
        if not bad:
            return [(min(u, v), max(u, v)) for u, v in pairs]
    raise RuntimeError("could not repair pairing into a simple d-regular graph")


def generate(kind: str, params: dict, seed: int | SeedSource,
             order_mode: str = "per-vertex-random") -> Graph:
    """Build a graph instance; a pure function of (kind, params, seed)."""
    source = seed if isinstance(seed, SeedSource) else SeedSource(seed)
    rng = source.rng(f"generate-{kind}")
    order_seed = source.child("neighbor-order")

    if kind == "erdos-renyi":
        n = int(params["n"])
        edges = _gen_erdos_renyi(n, float(params["p"]), rng)
    elif kind == "random-bipartite":
        n_left = int(params.get("n_left", params.get("n", 0) // 2))
        n_right = int(params.get("n_right", params.get("n", 0) - n_left))
        edges = _gen_random_bipartite(n_left, n_right, float(params["p"]), rng)
        n = n_left + n_right
    elif kind == "hidden-perfect-matching":
        n_side = int(params["n"])
        eps = float(params.get("eps", 0.4))
        edges = _gen_hidden_perfect_matching(n_side, eps, rng)
        n = 2 * n_side + max(1, math.ceil(eps * n_side / 2))
    elif kind == "d-regular":
        n = int(params["n"])
        edges = _gen_d_regular(n, int(params["d"]), rng)
    elif kind == "path":
        n = int(params["n"])
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        n = int(params["n"])
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "star":
        n = int(params["n"])
        edges = [(0, i) for i in range(1, n)]
    elif kind == "complete":
        n = int(params["n"])
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif kind == "from-file":
        return read_graph_file(params["path"], order_mode=order_mode, order_seed=order_seed)
    else:
        raise ValueError(f"unknown generator kind {kind!r}")

    return Graph(n, edges, order_mode=order_mode, order_seed=order_seed)


# -- file format -------------------------------------------------------------
#
# line 1:  n m
# then m lines:  u v   (0-indexed, u < v); '#' starts a comment


def write_graph_file(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_graph_file(path: str, order_mode: str = "per-vertex-random",
                    order_seed: SeedSource | None = None) -> Graph:
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two integers")
            a, b = int(parts[0]), int(parts[1])
            if header is None:
                header = (a, b)
            else:
                if not a < b:
                    raise ValueError(f"{path}:{lineno}: edges must satisfy u < v")
                edges.append((a, b))
    if header is None:
        raise ValueError(f"{path}: empty graph file")
    n, m = header
    if len(edges) != m:
        raise ValueError(f"{path}: header promises {m} edges, found {len(edges)}")
    return Graph(n, edges, order_mode=order_mode, order_seed=order_seed)
