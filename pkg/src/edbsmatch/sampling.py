"""Query-model building blocks: edge counting, edge sampling, degree
discovery, and the low-underfull-degree vertex classifier.

All sample sizes use natural logarithms and carry a ``scale`` knob that
multiplies the polylog constants so desk-scale runs finish; the formulas
themselves are fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracles import ListOracle, MatrixOracle

__all__ = [
    "EdgeCountEstimate",
    "estimate_edge_count",
    "MatrixEdgeSampler",
    "ListEdgeSampler",
    "LikelyEmptyGraphError",
    "EmptyGraphError",
    "DegreeTable",
    "build_degree_table",
    "SmallVertexSet",
    "classify_v_small",
]


class LikelyEmptyGraphError(RuntimeError):
    """Rejection sampling exhausted its attempt budget without finding an edge."""


class EmptyGraphError(RuntimeError):
    """Edge sampling requested on a graph known to have no edges."""


def _ln(n: int) -> float:
    return math.log(max(n, 2))


# -- edge-count estimation ----------------------------------------------------


@dataclass
class EdgeCountEstimate:
    m_hat: float
    hits: int
    samples: int
    epsilon: float


def edge_count_samples(n: int, epsilon: float, scale: float = 1.0) -> int:
    """Pair-probe budget ceil(scale * (100/eps^3) * n * ln n)."""
    return math.ceil(scale * (100.0 / epsilon**3) * n * _ln(n))


def estimate_edge_count(oracle: MatrixOracle, n: int, epsilon: float,
                        scale: float, rng: np.random.Generator) -> EdgeCountEstimate:
    """Estimate the edge count from uniformly sampled pair probes.

    Draws S = ceil(scale * (100/eps^3) * n * ln n) unordered pairs with
    repetition, one matrix query each.  A probe counts as a hit only with
    probability (n-1)/(2n) when it lands on an edge, which makes the hit
    probability exactly m/n^2 per draw; the estimate is then

        m_hat = (1 + eps) * hits * n^2 / S + eps * n.

    Sandwich target: m <= m_hat <= (1+eps)*m + 2*eps*n with high probability
    for eps <= 1/4.
    """
    if not 0.0 < epsilon <= 0.25:
        raise ValueError("epsilon must be in (0, 1/4]")
    if not 0.0 < scale <= 1.0:
        raise ValueError("scale must be in (0, 1]")
    s = edge_count_samples(n, epsilon, scale)
    if n < 2:
        return EdgeCountEstimate(m_hat=epsilon * n, hits=0, samples=0, epsilon=epsilon)

    hits = 0
    thin = (n - 1) / (2.0 * n)
    remaining = s
    batch_size = 1 << 16
    while remaining > 0:
        b = min(batch_size, remaining)
        remaining -= b
        us = rng.integers(0, n, size=b)
        vs = rng.integers(0, n - 1, size=b)
        vs = vs + (vs >= us)  # uniform over ordered distinct pairs
        is_edge = oracle.query_pairs(us, vs)
        if is_edge.any():
            coins = rng.random(int(is_edge.sum())) < thin
            hits += int(coins.sum())
    m_hat = (1.0 + epsilon) * hits * float(n) * float(n) / s + epsilon * n
    return EdgeCountEstimate(m_hat=m_hat, hits=hits, samples=s, epsilon=epsilon)


# -- uniform edge samplers ----------------------------------------------------


class MatrixEdgeSampler:
    """Uniform edge sampling under matrix access by pair rejection.

    Each call draws unordered pairs until one is an edge; every probe is
    counted.  The attempt budget (64 * n^2 / max(1, m_floor) per call by
    default) turns a near-empty graph into a clean error instead of a hang.
    """

    def __init__(self, oracle: MatrixOracle, rng: np.random.Generator,
                 m_floor: int = 1, cap_factor: int = 64, batch: int = 256):
        self.oracle = oracle
        self.n = oracle.n
        self.rng = rng
        self.cap = max(1, math.ceil(cap_factor * self.n * self.n / max(1, m_floor)))
        self.batch = batch

    def sample(self) -> tuple[int, int]:
        n = self.n
        if n < 2:
            raise EmptyGraphError("no pairs exist on a single-vertex graph")
        attempts = 0
        while attempts < self.cap:
            b = min(self.batch, self.cap - attempts)
            us = self.rng.integers(0, n, size=b)
            vs = self.rng.integers(0, n - 1, size=b)
            vs = vs + (vs >= us)
            is_edge = self.oracle.query_pairs(us, vs)
            attempts += b
            hit = np.flatnonzero(is_edge)
            if len(hit):
                # later probes in this batch were still issued and counted;
                # the first hit is the sample
                i = int(hit[0])
                u, v = int(us[i]), int(vs[i])
                return (u, v) if u < v else (v, u)
        raise LikelyEmptyGraphError(
            f"no edge found in {attempts} sampled pairs; graph likely (near-)empty")


class ListEdgeSampler:
    """Uniform edge sampling under list access: one query per sample.

    Picks a vertex with probability deg(v)/(2m) and a uniform position in
    its list; both orientations of an edge are reachable, so the result is
    uniform over edges.
    """

    def __init__(self, degree_table: "DegreeTable", oracle: ListOracle,
                 rng: np.random.Generator):
        if degree_table.m < 1:
            raise EmptyGraphError("cannot sample edges from an empty graph")
        self.oracle = oracle
        self.rng = rng
        self.deg = degree_table.deg
        self._cum = np.cumsum(self.deg.astype(np.float64))
        self._total = float(self._cum[-1])

    def sample(self) -> tuple[int, int]:
        r = self.rng.random() * self._total
        v = int(np.searchsorted(self._cum, r, side="right"))
        i = int(self.rng.integers(1, self.deg[v] + 1))
        got = self.oracle.query(v, i)
        assert got is not None, "degree table inconsistent with oracle"
        u = got[1]
        return (v, u) if v < u else (u, v)


# -- degree discovery ----------------------------------------------------------


@dataclass
class DegreeTable:
    deg: np.ndarray
    m: int
    d: float
    max_degree: int
    list_queries_used: int


def build_degree_table(oracle: ListOracle, n: int) -> DegreeTable:
    """Exact degrees via binary search on the past-degree boundary.

    Costs at most ceil(log2(n+1)) + 1 list queries per vertex.
    """
    before = oracle.counters.list_queries
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        lo, hi = 0, n
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if oracle.query(v, mid) is not None:
                lo = mid
            else:
                hi = mid - 1
        deg[v] = lo
    used = oracle.counters.list_queries - before
    m2 = int(deg.sum())
    return DegreeTable(deg=deg, m=m2 // 2, d=m2 / n, max_degree=int(deg.max()) if n else 0,
                       list_queries_used=used)


# -- V_small classification -----------------------------------------------------


@dataclass
class SmallVertexSet:
    member: np.ndarray          # bool per vertex
    hit_counts: np.ndarray      # X_v
    samples_per_vertex: int     # K
    threshold: float            # tau
    mode: str

    def __contains__(self, v: int) -> bool:
        return bool(self.member[v])

    def count(self) -> int:
        return int(self.member.sum())


def classify_v_small(mode: str, edbs, *, gamma: float, delta_star: float,
                     scale: float, rng: np.random.Generator,
                     matrix_oracle: MatrixOracle | None = None,
                     list_oracle: ListOracle | None = None,
                     degree_table: DegreeTable | None = None,
                     eligible: np.ndarray | None = None) -> SmallVertexSet:
    """Classify vertices by sampled underfull-edge degree.

    A vertex joins the small set when its sampled count of incident
    underfull edges X_v stays at or below tau = scale * (100/eps^2) * ln n.
    Per-vertex sample counts K by mode:

    * matrix -- K = scale * (100/eps)   * n^(1-gamma)  * ln n random partner
      vertices, one matrix query each;
    * list   -- K = scale * (100/eps)   * D^(1-gamma)  * ln n random incident
      edges (D = max degree), one list query each;
    * hybrid -- K = scale * (100/eps^2) * D^(1-gamma)  * ln n incident edges
      (D = average degree), restricted to the ``eligible`` vertex set; hits
      additionally require the partner to be eligible.

    Membership of a retrieved pair in the underfull set costs nothing extra:
    the bounded subgraph is explicit.
    """
    eps = edbs.params.epsilon
    n = edbs.n
    tau = scale * (100.0 / eps**2) * _ln(n)
    base = max(1.0, float(delta_star))

    if mode == "matrix":
        if matrix_oracle is None:
            raise ValueError("matrix mode needs a matrix oracle")
        k_samples = math.ceil(scale * (100.0 / eps) * n ** (1.0 - gamma) * _ln(n))
    elif mode == "list":
        if list_oracle is None or degree_table is None:
            raise ValueError("list mode needs a list oracle and degree table")
        k_samples = math.ceil(scale * (100.0 / eps) * base ** (1.0 - gamma) * _ln(n))
    elif mode == "hybrid":
        if list_oracle is None or degree_table is None or eligible is None:
            raise ValueError("hybrid mode needs list oracle, degrees, and eligible set")
        k_samples = math.ceil(scale * (100.0 / eps**2) * base ** (1.0 - gamma) * _ln(n))
    else:
        raise ValueError(f"unknown classification mode {mode!r}")

    deg_h = edbs.deg_array()
    thr = edbs.underfull_threshold
    member = np.zeros(n, dtype=bool)
    hit_counts = np.zeros(n, dtype=np.int64)

    for v in range(n):
        if mode == "hybrid" and not eligible[v]:
            continue
        if mode == "matrix":
            partners = rng.integers(0, n, size=k_samples)
            valid = partners != v
            probed = partners[valid]
            if len(probed):
                in_e = matrix_oracle.query_pairs(np.full(len(probed), v), probed)
                candidates = probed[in_e]
            else:
                candidates = probed
        else:
            dv = int(degree_table.deg[v])
            if dv == 0:
                member[v] = True
                continue
            idxs = rng.integers(1, dv + 1, size=k_samples)
            candidates = list_oracle.query_many(v, idxs)
            if mode == "hybrid":
                candidates = candidates[eligible[candidates]]
        if len(candidates):
            close = (deg_h[v] + deg_h[candidates]) < thr
            hits = 0
            for u in candidates[close]:
                if not edbs.has_edge(v, int(u)):
                    hits += 1
            hit_counts[v] = hits
        member[v] = hit_counts[v] <= tau

    return SmallVertexSet(member=member, hit_counts=hit_counts,
                          samples_per_vertex=k_samples, threshold=tau, mode=mode)
