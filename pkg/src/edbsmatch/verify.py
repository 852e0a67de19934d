"""Offline ground-truth checks for built structures and pipeline runs.

Everything here reads the raw graph, which estimation paths may not do;
these functions back the invariant battery and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .edbs import Edbs
from .exact import max_matching_exact, maximum_matching_adj
from .graphs import Graph
from .sampling import SmallVertexSet

__all__ = [
    "underfull_edges",
    "small_subgraph_edges",
    "mu_of_edges",
    "sparsifier_check",
    "op_bound_check",
    "degree_bound_check",
    "CheckResult",
]


@dataclass
class CheckResult:
    ok: bool
    detail: str


def underfull_edges(g: Graph, h: Edbs) -> list[tuple[int, int]]:
    """Materialize the underfull edge set (outside the stored subgraph)."""
    return [(u, v) for u, v in g.edges()
            if not h.has_edge(u, v) and h.is_underfull(u, v)]


def mu_of_edges(n: int, edges) -> int:
    """Exact maximum matching size of an explicit edge list."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    match = maximum_matching_adj(adj)
    return sum(1 for x in match if x != -1) // 2


def small_subgraph_edges(g: Graph, h: Edbs, small: SmallVertexSet) -> list[tuple[int, int]]:
    """Offline edge set of the induced small subgraph."""
    out = []
    for u, v in g.edges():
        if small.member[u] and small.member[v] and (
                h.has_edge(u, v) or h.is_underfull(u, v)):
            out.append((u, v))
    return out


def sparsifier_check(g: Graph, h: Edbs, mu_g: int | None = None) -> CheckResult:
    """mu(G) <= (3/2 + eps) * mu(H union U), exact on both sides."""
    if mu_g is None:
        mu_g = max_matching_exact(g).size
    union = list(h.edges()) + underfull_edges(g, h)
    mu_hu = mu_of_edges(g.n, union)
    bound = (1.5 + h.params.epsilon) * mu_hu
    ok = mu_g <= bound + 1e-9
    return CheckResult(ok, f"mu_g={mu_g} mu_hu={mu_hu} bound={bound:.3f}")


def op_bound_check(h: Edbs, mu_g: int) -> CheckResult:
    """|op log| <= 3*beta^2*mu + beta^2."""
    beta = h.params.beta
    bound = 3 * beta * beta * mu_g + beta * beta
    ok = len(h.op_log) <= bound
    return CheckResult(ok, f"ops={len(h.op_log)} bound={bound}")


def degree_bound_check(g: Graph, h: Edbs, small: SmallVertexSet,
                       delta_star: float, gamma: float) -> CheckResult:
    """Every small vertex keeps degree <= beta + (1+eps)*D^gamma/eps in the
    induced small subgraph (computed offline)."""
    p = h.params
    cap = p.beta + (1.0 + p.epsilon) * float(delta_star)**gamma / p.epsilon
    deg = [0] * g.n
    for u, v in small_subgraph_edges(g, h, small):
        deg[u] += 1
        deg[v] += 1
    worst = max((deg[v] for v in range(g.n) if small.member[v]), default=0)
    ok = worst <= cap + 1e-9
    return CheckResult(ok, f"max_small_degree={worst} cap={cap:.3f}")
