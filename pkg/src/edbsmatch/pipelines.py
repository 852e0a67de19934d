"""End-to-end matching-size estimators and the matching-or-value dichotomy.

Three pipelines share one template: estimate or measure the graph's gross
parameters, grow a bounded subgraph from uniformly sampled edges until a
whole round of samples changes nothing, classify the low-underfull-degree
vertices, and run the vertex-sampling estimator on the induced small
subgraph through virtual adjacency access.

* ``matrix`` -- pair-query access; proxies (mu*, m*, D*) = (n, m_hat, n);
  reported interval [alpha, 1.5*alpha + 6*eps*n].
* ``list``   -- positional access; measures degrees exactly, gets a coarse
  matching lower bound first; proxies (lambda, m, max degree); interval
  [alpha, (1.5 + 6*eps)*alpha].
* ``hybrid`` -- as list, but the degree proxy is the average degree and
  vertices above d/eps are pruned before classification; interval
  [alpha, 1.5*alpha + 6*eps*n].

``run_dichotomy`` stops after the subgraph is built: when its exact maximum
matching is already an eps fraction of the coarse size estimate it returns
those edges as an explicit witness, otherwise it falls through to the value
estimate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np

from .edbs import Edbs, Params, SchematicParams, SmallSubgraph, build_edbs
from .exact import maximum_matching_adj
from .graphs import Graph
from .local_oracles import (EstimateValue, coarse_matching_estimate,
                            estimate_matching_size)
from .oracles import (CachedAdjacencyView, ListNeighborSource, ListOracle,
                      MatrixNeighborSource, MatrixOracle, QueryCounters)
from .sampling import (DegreeTable, ListEdgeSampler, MatrixEdgeSampler,
                       build_degree_table, classify_v_small,
                       estimate_edge_count)
from .seeding import SeedSource

__all__ = [
    "PipelineConfig",
    "EstimateReport",
    "DichotomyOutcome",
    "estimate_matrix",
    "estimate_list",
    "estimate_hybrid",
    "estimate_with_plugin",
    "run_dichotomy",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ["mode", "n", "m", "eps", "gamma", "scale", "seed", "alpha",
               "lower", "upper", "mu_exact", "q_matrix", "q_list", "ops", "ms"]


@dataclass
class PipelineConfig:
    """All pipeline knobs; per-step scales default to the global scale."""

    epsilon: float
    scale: float = 1.0
    gamma: float | None = None          # None -> epsilon^2 / 8
    c_beta: float = 32.0
    beta: int | None = None
    scale_count: float | None = None
    scale_rounds: float | None = None
    scale_classify: float | None = None
    scale_estimate: float | None = None
    scale_coarse: float | None = None
    estimator_levels: int | None = None  # None -> ceil(8/epsilon)
    slack_additive: float = 6.0
    slack_multiplicative: float = 6.0
    engine: str = "auto"
    component_cap: int = 500_000
    node_cap: int = 10_000_000
    visit_cap: int = 20_000_000

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.25:
            raise ValueError("pipelines require epsilon in (0, 1/4]")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def resolved_gamma(self) -> float:
        if self.gamma is not None:
            if not 0.0 < self.gamma < 1.0:
                raise ValueError("gamma must be in (0, 1)")
            return self.gamma
        return self.epsilon**2 / 8.0

    def resolved_params(self) -> Params:
        if self.beta is not None:
            return Params(epsilon=self.epsilon, beta=self.beta)
        return Params.from_epsilon(self.epsilon, self.c_beta)

    def s(self, name: str) -> float:
        value = getattr(self, f"scale_{name}")
        return self.scale if value is None else value

    def echo(self) -> dict:
        return asdict(self)


@dataclass
class EstimateReport:
    """One pipeline run's result with its validity interval and cost ledger."""

    mode: str
    n: int
    epsilon: float
    gamma: float
    scale: float
    seed: int
    alpha: float
    lower: float
    upper: float
    m: int | None = None
    mu_exact: int | None = None
    sandwich_ok: bool | None = None
    q_matrix: int = 0
    q_list: int = 0
    ops: int = 0
    ms: float = 0.0
    step_queries: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    schema: int = 1

    def to_json_dict(self) -> dict:
        out = asdict(self)
        return out

    def csv_row(self) -> list:
        def fmt(x):
            return "" if x is None else x
        return [self.mode, self.n, fmt(self.m), self.epsilon, self.gamma,
                self.scale, self.seed, self.alpha, self.lower, self.upper,
                fmt(self.mu_exact), self.q_matrix, self.q_list, self.ops,
                round(self.ms, 3)]


@dataclass
class DichotomyOutcome:
    """Either an explicit matching from the stored subgraph, or a value."""

    branch: str                      # "witness" | "value"
    matching: list[tuple[int, int]] | None
    report: EstimateReport | None
    mu_h: int
    coarse_proxy: float
    queries: tuple[int, int]


class _StepClock:
    """Snapshots query counters around named steps."""

    def __init__(self, counters: QueryCounters):
        self.counters = counters
        self.steps: dict[str, tuple[int, int]] = {}
        self._last = counters.snapshot()

    def mark(self, name: str) -> None:
        now = self.counters.snapshot()
        self.steps[name] = (now[0] - self._last[0], now[1] - self._last[1])
        self._last = now


def _report(mode: str, g: Graph, cfg: PipelineConfig, seed: int, alpha: float,
            upper: float, counters: QueryCounters, clock: _StepClock,
            t0: float, ops: int, flags: dict, m_known: int | None) -> EstimateReport:
    return EstimateReport(
        mode=mode, n=g.n, epsilon=cfg.epsilon, gamma=cfg.resolved_gamma(),
        scale=cfg.scale, seed=seed, alpha=alpha, lower=alpha, upper=upper,
        m=m_known, q_matrix=counters.matrix_queries, q_list=counters.list_queries,
        ops=ops, ms=(time.perf_counter() - t0) * 1e3,
        step_queries=dict(clock.steps), flags=flags, config=cfg.echo())


def _estimator_kwargs(cfg: PipelineConfig) -> dict:
    return dict(levels=cfg.estimator_levels, engine=cfg.engine,
                component_cap=cfg.component_cap, node_cap=cfg.node_cap,
                visit_cap=cfg.visit_cap)


# -- matrix pipeline -------------------------------------------------------------


def estimate_matrix(g: Graph, cfg: PipelineConfig, seed: int,
                    state_out: dict | None = None,
                    plugin: Callable | None = None,
                    gamma_override: float | None = None) -> EstimateReport:
    """Pair-query pipeline; see the module docstring."""
    t0 = time.perf_counter()
    eps = cfg.epsilon
    n = g.n
    gamma = gamma_override if gamma_override is not None else cfg.resolved_gamma()
    counters = QueryCounters()
    oracle = MatrixOracle(g, counters)
    source = SeedSource(seed)
    clock = _StepClock(counters)
    flags: dict = {}

    est = estimate_edge_count(oracle, n, eps, cfg.s("count"), source.rng("edge-count"))
    clock.mark("count")
    flags["m_hat"] = est.m_hat
    if state_out is not None:
        state_out["edge_count"] = est
    if est.m_hat <= 4.0 * eps * n:
        flags["early_exit"] = "edge-count"
        return _report("matrix", g, cfg, seed, 0.0, cfg.slack_additive * eps * n,
                       counters, clock, t0, 0, flags, None)

    params = cfg.resolved_params()
    sp = SchematicParams(mu_star=float(n), m_star=est.m_hat, delta_star=float(n),
                         gamma=gamma, scale=cfg.s("rounds"))
    sampler = MatrixEdgeSampler(oracle, source.rng("edge-sampler"),
                                m_floor=max(1, math.floor(est.m_hat)))
    h = build_edbs(n, params, sp, sampler.sample)
    clock.mark("build")

    small = classify_v_small("matrix", h, gamma=gamma, delta_star=float(n),
                             scale=cfg.s("classify"), rng=source.rng("classify"),
                             matrix_oracle=oracle)
    clock.mark("classify")

    view = CachedAdjacencyView(MatrixNeighborSource(oracle), n)
    sg = SmallSubgraph(h, small, view)
    delta_eff = sg.max_degree_bound(float(n), gamma)
    if plugin is not None:
        alpha = float(plugin(sg, n, eps, source.child("plugin")))
        est4 = None
    else:
        est4 = estimate_matching_size(sg, n, delta_eff, eps, cfg.s("estimate"),
                                      source, **_estimator_kwargs(cfg))
        alpha = est4.value
    clock.mark("estimate")

    if state_out is not None:
        state_out.update(edbs=h, small=small, subgraph=sg, estimate=est4,
                         oracle=oracle, gamma=gamma)
    upper = 1.5 * alpha + cfg.slack_additive * eps * n
    return _report("matrix", g, cfg, seed, alpha, upper, counters, clock, t0,
                   len(h.op_log), flags, None)


def estimate_with_plugin(g: Graph, cfg: PipelineConfig, seed: int,
                         plugin: Callable, q: float,
                         state_out: dict | None = None) -> EstimateReport:
    """Matrix pipeline with the final estimator swapped for a plugin.

    ``plugin(view, n, epsilon, seed_source)`` must behave as a value
    estimator with at most eps*n one-sided error on its input subgraph;
    the exploration exponent becomes gamma = 1/(1+q) for its advertised
    query exponent q.
    """
    if q < 0:
        raise ValueError("plugin exponent q must be >= 0")
    gamma = 1.0 / (1.0 + q)
    # gamma must stay in (0, 1): q = 0 means a free plugin, cap just below 1
    gamma = min(gamma, 0.999999)
    report = estimate_matrix(g, cfg, seed, state_out=state_out, plugin=plugin,
                             gamma_override=gamma)
    report.mode = "plugin"
    report.flags["plugin_q"] = q
    return report


# -- list and hybrid pipelines -----------------------------------------------------


def _coarse_with_retry(view, n: int, eps: float, cfg: PipelineConfig,
                       source: SeedSource, m_known: int,
                       flags: dict) -> EstimateValue:
    scale = cfg.s("coarse")
    attempt = 0
    while True:
        est = coarse_matching_estimate(view, n, eps, scale,
                                       source.child(f"coarse-{attempt}"),
                                       engine=cfg.engine,
                                       component_cap=cfg.component_cap,
                                       node_cap=cfg.node_cap,
                                       visit_cap=cfg.visit_cap)
        if est.value > 0 or m_known == 0 or attempt >= 3:
            if attempt:
                flags["coarse_retries"] = attempt
            return est
        attempt += 1
        scale *= 2.0


def _list_like(mode: str, g: Graph, cfg: PipelineConfig, seed: int,
               state_out: dict | None) -> EstimateReport:
    t0 = time.perf_counter()
    eps = cfg.epsilon
    n = g.n
    gamma = cfg.resolved_gamma()
    counters = QueryCounters()
    oracle = ListOracle(g, counters)
    source = SeedSource(seed)
    clock = _StepClock(counters)
    flags: dict = {}

    dt = build_degree_table(oracle, n)
    clock.mark("degrees")
    if state_out is not None:
        state_out["degree_table"] = dt
    if dt.m == 0:
        flags["early_exit"] = "no-edges"
        return _report(mode, g, cfg, seed, 0.0, 0.0, counters, clock, t0, 0,
                       flags, 0)

    view = CachedAdjacencyView(ListNeighborSource(oracle, dt.deg), n)
    coarse = _coarse_with_retry(view, n, eps, cfg, source, dt.m, flags)
    lam = coarse.value
    if lam <= 0:
        flags["coarse_floor"] = True
        lam = 1.0
    clock.mark("coarse")

    params = cfg.resolved_params()
    delta_star = float(dt.max_degree) if mode == "list" else max(dt.d, 1.0)
    sp = SchematicParams(mu_star=lam, m_star=float(dt.m), delta_star=max(delta_star, 1.0),
                         gamma=gamma, scale=cfg.s("rounds"))
    sampler = ListEdgeSampler(dt, oracle, source.rng("edge-sampler"))
    h = build_edbs(n, params, sp, sampler.sample)
    clock.mark("build")

    eligible = None
    if mode == "hybrid":
        eligible = dt.deg <= dt.d / eps
        flags["pruned_vertices"] = int((~eligible).sum())
    small = classify_v_small("list" if mode == "list" else "hybrid", h,
                             gamma=gamma, delta_star=max(delta_star, 1.0),
                             scale=cfg.s("classify"), rng=source.rng("classify"),
                             list_oracle=oracle, degree_table=dt,
                             eligible=eligible)
    clock.mark("classify")

    sg = SmallSubgraph(h, small, view)
    delta_eff = sg.max_degree_bound(max(delta_star, 1.0), gamma)
    est = estimate_matching_size(sg, n, delta_eff, eps, cfg.s("estimate"),
                                 source, **_estimator_kwargs(cfg))
    alpha = est.value
    clock.mark("estimate")

    if state_out is not None:
        state_out.update(edbs=h, small=small, subgraph=sg, estimate=est,
                         coarse=coarse, oracle=oracle, gamma=gamma,
                         eligible=eligible)
    if mode == "list":
        upper = (1.5 + cfg.slack_multiplicative * eps) * alpha
    else:
        upper = 1.5 * alpha + cfg.slack_additive * eps * n
    return _report(mode, g, cfg, seed, alpha, upper, counters, clock, t0,
                   len(h.op_log), flags, dt.m)


def estimate_list(g: Graph, cfg: PipelineConfig, seed: int,
                  state_out: dict | None = None) -> EstimateReport:
    """Positional-query pipeline; see the module docstring."""
    return _list_like("list", g, cfg, seed, state_out)


def estimate_hybrid(g: Graph, cfg: PipelineConfig, seed: int,
                    state_out: dict | None = None) -> EstimateReport:
    """List pipeline with average-degree proxy and high-degree pruning."""
    return _list_like("hybrid", g, cfg, seed, state_out)


# -- dichotomy ---------------------------------------------------------------------


def matching_of_explicit_subgraph(h: Edbs) -> list[tuple[int, int]]:
    """Exact maximum matching of the stored subgraph (it is explicit and its
    max degree is at most beta, so this is cheap and query-free)."""
    adj = [[] for _ in range(h.n)]
    for a, b in h.edges():
        adj[a].append(b)
        adj[b].append(a)
    match = maximum_matching_adj(adj)
    return sorted({(min(v, match[v]), max(v, match[v]))
                   for v in range(h.n) if match[v] != -1})


def run_dichotomy(g: Graph, mode: str, cfg: PipelineConfig, seed: int,
                  state_out: dict | None = None) -> DichotomyOutcome:
    """Return an explicit matching witness or fall back to a value estimate.

    Builds the bounded subgraph the way the chosen pipeline would, computes
    its exact maximum matching, and compares against eps times a coarse
    size estimate (the online stand-in for the unknown true size).
    """
    if mode not in ("matrix", "list", "hybrid"):
        raise ValueError(f"unknown dichotomy mode {mode!r}")
    eps = cfg.epsilon
    n = g.n
    gamma = cfg.resolved_gamma()
    source = SeedSource(seed)
    counters = QueryCounters()
    t0 = time.perf_counter()
    flags: dict = {}
    clock: _StepClock

    if mode == "matrix":
        oracle = MatrixOracle(g, counters)
        clock = _StepClock(counters)
        est = estimate_edge_count(oracle, n, eps, cfg.s("count"),
                                  source.rng("edge-count"))
        clock.mark("count")
        if est.m_hat <= 4.0 * eps * n:
            report = _report("matrix", g, cfg, seed, 0.0,
                             cfg.slack_additive * eps * n, counters, clock, t0,
                             0, {"early_exit": "edge-count"}, None)
            return DichotomyOutcome("value", None, report, 0, 0.0,
                                    counters.snapshot())
        params = cfg.resolved_params()
        sp = SchematicParams(mu_star=float(n), m_star=est.m_hat,
                             delta_star=float(n), gamma=gamma,
                             scale=cfg.s("rounds"))
        sampler = MatrixEdgeSampler(oracle, source.rng("edge-sampler"),
                                    m_floor=max(1, math.floor(est.m_hat)))
        h = build_edbs(n, params, sp, sampler.sample)
        clock.mark("build")
        view = CachedAdjacencyView(MatrixNeighborSource(oracle), n)
        coarse = coarse_matching_estimate(view, n, eps, cfg.s("coarse"),
                                          source.child("dichotomy-coarse"),
                                          engine=cfg.engine,
                                          component_cap=cfg.component_cap,
                                          node_cap=cfg.node_cap,
                                          visit_cap=cfg.visit_cap)
        clock.mark("coarse")
        dt = None
    else:
        oracle = ListOracle(g, counters)
        clock = _StepClock(counters)
        dt = build_degree_table(oracle, n)
        clock.mark("degrees")
        if dt.m == 0:
            report = _report(mode, g, cfg, seed, 0.0, 0.0, counters, clock, t0,
                             0, {"early_exit": "no-edges"}, 0)
            return DichotomyOutcome("value", None, report, 0, 0.0,
                                    counters.snapshot())
        view = CachedAdjacencyView(ListNeighborSource(oracle, dt.deg), n)
        coarse = _coarse_with_retry(view, n, eps, cfg, source, dt.m, flags)
        clock.mark("coarse")
        lam = coarse.value if coarse.value > 0 else 1.0
        params = cfg.resolved_params()
        delta_star = float(dt.max_degree) if mode == "list" else max(dt.d, 1.0)
        sp = SchematicParams(mu_star=lam, m_star=float(dt.m),
                             delta_star=max(delta_star, 1.0), gamma=gamma,
                             scale=cfg.s("rounds"))
        sampler = ListEdgeSampler(dt, oracle, source.rng("edge-sampler"))
        h = build_edbs(n, params, sp, sampler.sample)
        clock.mark("build")

    matching = matching_of_explicit_subgraph(h)
    mu_h = len(matching)
    proxy = coarse.value
    if state_out is not None:
        state_out.update(edbs=h, coarse=coarse, oracle=oracle)

    if mu_h > 0 and mu_h >= eps * proxy:
        return DichotomyOutcome("witness", matching, None, mu_h, proxy,
                                counters.snapshot())

    # value branch: run the remaining pipeline steps on the built state
    if mode == "matrix":
        small = classify_v_small("matrix", h, gamma=gamma, delta_star=float(n),
                                 scale=cfg.s("classify"),
                                 rng=source.rng("classify"),
                                 matrix_oracle=oracle)
        delta_base = float(n)
        m_known = None
    else:
        eligible = None
        if mode == "hybrid":
            eligible = dt.deg <= dt.d / eps
        small = classify_v_small("list" if mode == "list" else "hybrid", h,
                                 gamma=gamma, delta_star=max(delta_star, 1.0),
                                 scale=cfg.s("classify"),
                                 rng=source.rng("classify"),
                                 list_oracle=oracle, degree_table=dt,
                                 eligible=eligible)
        delta_base = max(delta_star, 1.0)
        m_known = dt.m
    clock.mark("classify")
    sg = SmallSubgraph(h, small, view)
    est = estimate_matching_size(sg, n, sg.max_degree_bound(delta_base, gamma),
                                 eps, cfg.s("estimate"), source,
                                 **_estimator_kwargs(cfg))
    clock.mark("estimate")
    alpha = est.value
    if mode == "list":
        upper = (1.5 + cfg.slack_multiplicative * eps) * alpha
    else:
        upper = 1.5 * alpha + cfg.slack_additive * eps * n
    report = _report(mode, g, cfg, seed, alpha, upper, counters, clock, t0,
                     len(h.op_log), flags, m_known)
    if state_out is not None:
        state_out.update(small=small, subgraph=sg)
    return DichotomyOutcome("value", None, report, mu_h, proxy,
                            counters.snapshot())
