"""Edge-degree-bounded subgraph: structure, repair loop, and the induced
small subgraph fed to the final estimator.

The central object is an explicit edge set H over the graph's vertices in
which no member edge has edge degree (sum of its endpoints' H-degrees)
above beta.  Underfull edges (edge degree strictly below (1-eps)*beta) may
be inserted; overfull member edges (edge degree above beta) must be
deleted.  Every legal insert or delete strictly raises an integer potential,
which is what bounds the total number of operations; the structure tracks
the potential incrementally (doubled, to stay integral) and asserts the
strict increase on every single operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections import deque
from typing import Callable

import numpy as np

from .sampling import EmptyGraphError, LikelyEmptyGraphError, SmallVertexSet

__all__ = [
    "Params",
    "SchematicParams",
    "Edbs",
    "build_edbs",
    "SmallSubgraph",
]


@dataclass(frozen=True)
class Params:
    """Approximation knobs: eps and the integer degree bound beta.

    ``eps * beta`` must be a positive integer (the potential argument
    needs it); :meth:`from_epsilon` picks the smallest admissible beta at
    or above ceil(c_beta / eps^3).
    """

    epsilon: float
    beta: int

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        if self.beta < 1:
            raise ValueError("beta must be a positive integer")
        eb = self.epsilon * self.beta
        if eb < 1.0 - 1e-9 or abs(eb - round(eb)) > 1e-9:
            raise ValueError(
                f"epsilon*beta must be an integer >= 1; got {eb} "
                f"(epsilon={self.epsilon}, beta={self.beta})")

    @property
    def eps_beta(self) -> int:
        return int(round(self.epsilon * self.beta))

    @property
    def underfull_threshold(self) -> int:
        """Strict bound: an edge is underfull iff its edge degree < this."""
        return self.beta - self.eps_beta

    @classmethod
    def from_epsilon(cls, epsilon: float, c_beta: float = 32.0) -> "Params":
        base = math.ceil(c_beta / epsilon**3)
        beta = max(base, math.ceil(1.0 / epsilon))
        while True:
            eb = epsilon * beta
            if eb >= 1.0 - 1e-9 and abs(eb - round(eb)) <= 1e-9:
                return cls(epsilon=epsilon, beta=beta)
            beta += 1
            if beta > base + 10_000_000:  # pragma: no cover
                raise ValueError(f"no admissible beta near {base} for epsilon={epsilon}")


@dataclass
class SchematicParams:
    """Round-loop proxies: a matching lower bound, an edge-count upper
    bound, a degree proxy, and the exploration exponent gamma."""

    mu_star: float
    m_star: float
    delta_star: float
    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if self.mu_star <= 0 or self.m_star <= 0 or self.delta_star <= 0:
            raise ValueError("mu_star, m_star, delta_star must be positive")

    def round_length(self, n: int) -> int:
        ln_n = math.log(max(n, 2))
        raw = self.scale * 100.0 * self.m_star * ln_n / (
            self.mu_star * self.delta_star**self.gamma)
        return max(1, math.ceil(raw))


class Edbs:
    """Explicit bounded subgraph with incremental potential and an op log."""

    def __init__(self, n: int, params: Params):
        self.n = n
        self.params = params
        self._adj: list[set[int]] = [set() for _ in range(n)]
        self._deg = np.zeros(n, dtype=np.int64)
        self._edges: set[int] = set()
        self.op_log: list[tuple[str, int, int]] = []
        self.two_phi = 0
        self.underfull_threshold = params.underfull_threshold

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        a, b = (u, v) if u < v else (v, u)
        return a * self.n + b in self._edges

    def degree(self, v: int) -> int:
        return int(self._deg[v])

    def deg_array(self) -> np.ndarray:
        return self._deg

    def edge_degree(self, u: int, v: int) -> int:
        return int(self._deg[u] + self._deg[v])

    def is_underfull(self, u: int, v: int) -> bool:
        """Strictly below the underfull threshold (edges of H never are,
        since membership contributes 2 to their own edge degree)."""
        return self.edge_degree(u, v) < self.underfull_threshold

    def is_overfull(self, u: int, v: int) -> bool:
        return self.edge_degree(u, v) > self.params.beta

    def edges(self) -> list[tuple[int, int]]:
        return [divmod(key, self.n) for key in sorted(self._edges)]

    def neighbors_in(self, v: int) -> set[int]:
        return self._adj[v]

    # -- mutation -----------------------------------------------------------

    def insert(self, u: int, v: int) -> None:
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"bad edge ({u}, {v})")
        a, b = (u, v) if u < v else (v, u)
        key = a * self.n + b
        if key in self._edges:
            raise AssertionError(f"insert of edge already present: ({a}, {b})")
        if not self.is_underfull(a, b):
            raise AssertionError(f"insert of non-underfull edge ({a}, {b})")
        self._edges.add(key)
        self._adj[a].add(b)
        self._adj[b].add(a)
        self._deg[a] += 1
        self._deg[b] += 1
        # doubled-potential delta: 2*(2*beta+1) - 4*deg_{H+new}(e)
        delta = 2 * (2 * self.params.beta + 1) - 4 * self.edge_degree(a, b)
        if delta < 2:
            raise AssertionError(
                f"potential did not strictly increase on insert ({a},{b}): {delta}")
        self.two_phi += delta
        self.op_log.append(("I", a, b))

    def delete(self, u: int, v: int) -> None:
        a, b = (u, v) if u < v else (v, u)
        key = a * self.n + b
        if key not in self._edges:
            raise AssertionError(f"delete of absent edge ({a}, {b})")
        if not self.is_overfull(a, b):
            raise AssertionError(f"delete of non-overfull edge ({a}, {b})")
        delta = 4 * self.edge_degree(a, b) - 2 * (2 * self.params.beta + 1)
        if delta < 2:
            raise AssertionError(
                f"potential did not strictly increase on delete ({a},{b}): {delta}")
        self._edges.remove(key)
        self._adj[a].discard(b)
        self._adj[b].discard(a)
        self._deg[a] -= 1
        self._deg[b] -= 1
        self.two_phi += delta
        self.op_log.append(("D", a, b))

    def restore(self, around: tuple[int, int]) -> int:
        """Delete overfull member edges to a fixpoint after an insert.

        Only edges touching a just-modified endpoint can be overfull, so a
        FIFO worklist seeded at the inserted edge's endpoints (extended by
        endpoints of deleted edges) reaches the fixpoint.
        Returns the number of deletions.
        """
        work: deque[tuple[int, int]] = deque()

        def push_incident(x: int) -> None:
            for y in list(self._adj[x]):
                work.append((x, y) if x < y else (y, x))

        push_incident(around[0])
        push_incident(around[1])
        deleted = 0
        while work:
            a, b = work.popleft()
            if not self.has_edge(a, b):
                continue
            if self.is_overfull(a, b):
                self.delete(a, b)
                deleted += 1
                push_incident(a)
                push_incident(b)
        return deleted

    # -- verification -------------------------------------------------------

    def check_no_overfull(self) -> bool:
        """Full scan: no member edge exceeds the degree bound."""
        return all(not self.is_overfull(a, b) for a, b in self.edges())

    def recompute_two_phi(self) -> int:
        """Potential from scratch (testing aid for the incremental value)."""
        term1 = (2 * self.params.beta - 1) * int(self._deg.sum())
        term2 = 2 * sum(self.edge_degree(a, b) for a, b in self.edges())
        return term1 - term2

    def dump_text(self) -> str:
        """Edge list plus op sequence, replayable for debugging."""
        lines = [f"edbs n={self.n} beta={self.params.beta} eps={self.params.epsilon}"]
        lines += [f"e {a} {b}" for a, b in self.edges()]
        lines += [f"op {kind} {a} {b}" for kind, a, b in self.op_log]
        return "\n".join(lines) + "\n"


def build_edbs(n: int, params: Params, sp: SchematicParams,
               sampler: Callable[[], tuple[int, int]],
               max_ops: int | None = None) -> Edbs:
    """Round loop: sample edges, insert the underfull ones, repair, stop
    after the first round that changes nothing.

    ``sampler`` returns a uniformly random edge per call.  A sampler that
    signals a (near-)empty graph on the very first draw yields the empty
    structure; signalled emptiness later in the run propagates, since it
    would contradict an edge having already been seen.
    """
    h = Edbs(n, params)
    round_len = sp.round_length(n)
    ops_bound = max_ops
    first_draw = True
    while True:
        dirty = False
        for _ in range(round_len):
            try:
                u, v = sampler()
            except (EmptyGraphError, LikelyEmptyGraphError):
                if first_draw:
                    return h
                raise
            first_draw = False
            if not h.has_edge(u, v) and h.is_underfull(u, v):
                h.insert(u, v)
                h.restore((u, v))
                dirty = True
                if ops_bound is not None and len(h.op_log) > ops_bound:
                    raise AssertionError(
                        f"operation log exceeded bound {ops_bound}")
        if not dirty:
            return h


class SmallSubgraph:
    """The estimator's target graph: member edges and underfull edges of the
    ground graph, induced on the low-underfull-degree vertex set.

    Edge membership for a ground-graph edge (u, v) is: both endpoints in
    the small vertex set, and the edge is either in the bounded subgraph or
    underfull with respect to it.  Neighbor lists are materialized through
    the supplied adjacency view (n-1 matrix probes or deg(v) list probes on
    first touch, then cached).
    """

    def __init__(self, edbs: Edbs, small: SmallVertexSet, adjacency_view):
        self.edbs = edbs
        self.small = small
        self.view = adjacency_view
        self.n = edbs.n
        self._cache: dict[int, tuple[int, ...]] = {}

    def contains(self, u: int, v: int, *, edge_in_graph: bool = True) -> bool:
        """Membership for a pair already known (or verified) to be a graph
        edge; pair probes to establish that are the caller's job in matrix
        mode."""
        if not edge_in_graph:
            return False
        if not (self.small.member[u] and self.small.member[v]):
            return False
        return self.edbs.has_edge(u, v) or self.edbs.is_underfull(u, v)

    def neighbors(self, v: int) -> tuple[int, ...]:
        got = self._cache.get(v)
        if got is not None:
            return got
        if not self.small.member[v]:
            self._cache[v] = ()
            return ()
        raw = self.view.neighbors(v)
        mine = tuple(u for u in raw if self.contains(v, u))
        self._cache[v] = mine
        return mine

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def list_query(self, v: int, i: int) -> tuple[int, int] | None:
        """Positional neighbor access mirroring the ground list oracle."""
        if not 1 <= i <= self.n:
            raise ValueError(f"list index must be in [1, {self.n}]")
        mine = self.neighbors(v)
        if i > len(mine):
            return None
        return (v, mine[i - 1])

    def max_degree_bound(self, delta_star: float, gamma: float) -> float:
        """Offline ceiling for member degrees: beta + (1+eps)*D^gamma/eps."""
        p = self.edbs.params
        return p.beta + (1.0 + p.epsilon) * float(delta_star)**gamma / p.epsilon
