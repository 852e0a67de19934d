"""Drop-in final-stage estimators for the plugin pipeline hook.

A plugin receives the induced small subgraph through its virtual adjacency
interface and must return a value estimate with one-sided additive error at
most eps*n on that subgraph.
"""

from __future__ import annotations

from .exact import maximum_matching_adj
from .seeding import SeedSource

__all__ = ["exact_subgraph_plugin"]


def exact_subgraph_plugin(view, n: int, epsilon: float,
                          seed_source: SeedSource) -> float:
    """Exact maximum matching of the subgraph, materialized through the view.

    A (1, 0)-accurate reference plugin: spends one full neighbor scan per
    vertex and solves the explicit instance.
    """
    adj = [list(view.neighbors(v)) for v in range(n)]
    match = maximum_matching_adj(adj)
    return sum(1 for x in match if x != -1) / 2.0
