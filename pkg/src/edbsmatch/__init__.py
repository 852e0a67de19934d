"""Maximum-matching size estimation via edge-degree-bounded subgraphs under
instrumented adjacency-list and adjacency-matrix query models, with exact
oracles for desk-scale verification."""

from .edbs import Edbs, Params, SchematicParams, SmallSubgraph, build_edbs
from .exact import (ExactMatching, chi_square_uniform, check_fractional_bound,
                    max_matching_exact, offline_layered)
from .graphs import Graph, generate, read_graph_file, stats, write_graph_file
from .local_oracles import (MatchingOracleSession, RankSource,
                            coarse_matching_estimate, estimate_matching_size,
                            greedy_mis_member)
from .oracles import (CachedAdjacencyView, ListNeighborSource, ListOracle,
                      MatrixNeighborSource, MatrixOracle, QueryCounters)
from .pipelines import (DichotomyOutcome, EstimateReport, PipelineConfig,
                        estimate_hybrid, estimate_list, estimate_matrix,
                        estimate_with_plugin, run_dichotomy)
from .sampling import (DegreeTable, EdgeCountEstimate, ListEdgeSampler,
                       MatrixEdgeSampler, SmallVertexSet, build_degree_table,
                       classify_v_small, estimate_edge_count)
from .seeding import SeedSource

__version__ = "0.1.0"

__all__ = [
    "Edbs", "Params", "SchematicParams", "SmallSubgraph", "build_edbs",
    "ExactMatching", "chi_square_uniform", "check_fractional_bound",
    "max_matching_exact", "offline_layered",
    "Graph", "generate", "read_graph_file", "stats", "write_graph_file",
    "MatchingOracleSession", "RankSource", "coarse_matching_estimate",
    "estimate_matching_size", "greedy_mis_member",
    "CachedAdjacencyView", "ListNeighborSource", "ListOracle",
    "MatrixNeighborSource", "MatrixOracle", "QueryCounters",
    "DichotomyOutcome", "EstimateReport", "PipelineConfig",
    "estimate_hybrid", "estimate_list", "estimate_matrix",
    "estimate_with_plugin", "run_dichotomy",
    "DegreeTable", "EdgeCountEstimate", "ListEdgeSampler",
    "MatrixEdgeSampler", "SmallVertexSet", "build_degree_table",
    "classify_v_small", "estimate_edge_count",
    "SeedSource",
]
