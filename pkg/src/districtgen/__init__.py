"""districtgen: contiguous, population-balanced districting plans.

Builds a dual graph from census-style inputs, grows plans with a k-medoids
procedure (smallest district expands first), refines them with tabu-guarded
Flip/Swap local search, and optionally works on a coarsened graph that is
restored along an uncoarsening schedule. Everything is seeded and
reproducible; ensembles of runs aggregate into summary statistics.
"""
from .coarsen import MergeHistory, MergeRecord, UncoarseningSchedule, coarsen, uncoarsen_to
from .graph import (DistrictingPlan, DualGraph, Subgraph, TabulationBlock, UNASSIGNED,
                    articulation_points, border_pairs, induced_district_subgraph,
                    is_contiguous, validate_plan)
from .ingest import (RawUnit, build_graph, county_premerge, load_graph,
                     read_adjacency_json, read_population_csv, rook_adjacency)
from .kmedoids import (KMedoidsResult, broder_spanning_tree, grow_districts,
                       recenter_medoid, run_kmedoids)
from .local_search import Move, flip_candidates, local_search, score_move, swap_candidates
from .metrics import (PlanMetrics, convex_hull_compactness, deviation, evaluate_plan,
                      mean_compactness, pop_star)
from .pipeline import (RunConfig, RunReport, derive_run_seed, read_plan, run_ensemble,
                       run_once, summarize, write_plan, write_summary_csv)

__version__ = "0.1.0"

__all__ = [
    "DistrictingPlan", "DualGraph", "Subgraph", "TabulationBlock", "UNASSIGNED",
    "articulation_points", "border_pairs", "induced_district_subgraph", "is_contiguous",
    "validate_plan",
    "RawUnit", "build_graph", "county_premerge", "load_graph", "read_adjacency_json",
    "read_population_csv", "rook_adjacency",
    "MergeHistory", "MergeRecord", "UncoarseningSchedule", "coarsen", "uncoarsen_to",
    "KMedoidsResult", "broder_spanning_tree", "grow_districts", "recenter_medoid",
    "run_kmedoids",
    "Move", "flip_candidates", "local_search", "score_move", "swap_candidates",
    "PlanMetrics", "convex_hull_compactness", "deviation", "evaluate_plan",
    "mean_compactness", "pop_star",
    "RunConfig", "RunReport", "derive_run_seed", "read_plan", "run_ensemble", "run_once",
    "summarize", "write_plan", "write_summary_csv",
]
