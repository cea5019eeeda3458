"""Seeded single-run and ensemble drivers plus plan serialization.

A run wires coarsen -> k-medoids -> local search -> scheduled uncoarsening
with a local search at every level, carrying harvested plans through the
same ladder as the main plan. Runs are bit-deterministic for a fixed seed;
ensemble run seeds derive from (master seed, run index) via SeedSequence,
so results do not depend on how many workers execute them.

Timing split (mirrors the reported runtime columns): "algorithm runtime"
covers coarsening, k-medoids, and all uncoarsening plus main-plan local
searches; harvested-plan local searches are timed separately; "total
runtime" adds final scoring and, when driven through the CLI, the one-off
data ingest cost.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .coarsen import UncoarseningSchedule, coarsen
from .graph import DistrictingPlan, DualGraph, validate_plan
from .kmedoids import run_kmedoids
from .local_search import NEIGHBORHOODS, local_search
from .metrics import PlanMetrics, evaluate_plan, pop_star

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Algorithm parameters for one generation run."""

    k: int
    li: int = 750
    mi: int = 100
    nf: str = "cmb"
    uc: UncoarseningSchedule = UncoarseningSchedule((1.0,))
    seed: int = 0
    dev_target: float = 1.0
    harvest_threshold: float = 5.0
    medoid_mode: str = "branch"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.li < 1 or self.mi < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.nf not in NEIGHBORHOODS:
            raise ValueError(f"nf must be one of {NEIGHBORHOODS}")
        if self.dev_target <= 0 or self.harvest_threshold <= 0:
            raise ValueError("thresholds must be > 0")

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "li": self.li,
            "mi": self.mi,
            "nf": self.nf,
            "uc": self.uc.as_text(),
            "seed": self.seed,
            "dev_target": self.dev_target,
            "harvest_threshold": self.harvest_threshold,
            "medoid_mode": self.medoid_mode,
        }


@dataclass
class PlanOutcome:
    plan: DistrictingPlan
    metrics: PlanMetrics


@dataclass
class RunReport:
    config: RunConfig
    graph_hash: str
    kmed_dev: float
    kmed_comp: float | None
    kmed_iterations: int
    main: PlanOutcome
    harvested: list[PlanOutcome] = field(default_factory=list)
    algorithm_runtime_s: float = 0.0
    harvest_runtime_s: float = 0.0
    total_runtime_s: float = 0.0


def derive_run_seed(master_seed: int, index: int) -> int:
    """Per-run seed from (master seed, run index); stable across platforms."""
    state = np.random.SeedSequence((master_seed, index)).generate_state(2, np.uint32)
    return (int(state[0]) << 32) | int(state[1])


def run_once(graph: DualGraph, config: RunConfig, *, validate: bool = False,
             process_harvested: bool = True, ingest_seconds: float = 0.0) -> RunReport:
    """Execute the full pipeline for one seed.

    `validate` re-checks completeness, contiguity, and population
    conservation after every k-medoids iteration and every local-search
    move (assertion mode for tests). `process_harvested=False` skips the
    refinement of harvested plans; the main trajectory is unaffected either
    way because harvested refinement draws no randomness.
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    fractions = config.uc.fractions
    t_start = time.perf_counter()
    harvest_seconds = 0.0

    cap = pop_star(graph, config.k)
    level_graph, history = coarsen(graph, fractions[0], rng, cap)
    if config.k > level_graph.n:
        raise ValueError(
            f"k={config.k} exceeds the coarsened vertex count {level_graph.n}")

    kres = run_kmedoids(
        level_graph, config.k, rng,
        max_iterations=config.mi, dev_target=config.dev_target,
        harvest_threshold=config.harvest_threshold,
        medoid_mode=config.medoid_mode, validate=validate)

    # Passengers ride the uncoarsening ladder together: the working plan,
    # a frozen snapshot of the k-medoids result (scored without any local
    # search), then the harvested plans.
    main_plan = kres.best_plan
    kmed_snapshot = main_plan.copy()
    harvested = list(kres.harvested_plans) if process_harvested else []
    passengers = [main_plan, kmed_snapshot] + harvested

    def search(plan: DistrictingPlan, current: DualGraph) -> None:
        local_search(current, plan, config.li, neighborhood=config.nf,
                     dev_target=config.dev_target, validate=validate)

    search(passengers[0], level_graph)
    for extra in passengers[2:]:
        t0 = time.perf_counter()
        search(extra, level_graph)
        harvest_seconds += time.perf_counter() - t0
    for fraction in fractions[1:]:
        level_graph, passengers = history.uncoarsen(fraction, passengers)
        search(passengers[0], level_graph)
        for extra in passengers[2:]:
            t0 = time.perf_counter()
            search(extra, level_graph)
            harvest_seconds += time.perf_counter() - t0
    algorithm_seconds = time.perf_counter() - t_start - harvest_seconds

    if validate:
        for plan in passengers:
            validate_plan(level_graph, plan)

    main_metrics = evaluate_plan(level_graph, passengers[0])
    kmed_metrics = evaluate_plan(level_graph, passengers[1])
    t0 = time.perf_counter()
    harvest_outcomes = [PlanOutcome(plan=p, metrics=evaluate_plan(level_graph, p))
                        for p in passengers[2:]]
    harvest_seconds += time.perf_counter() - t0

    total = time.perf_counter() - t_start + ingest_seconds
    return RunReport(
        config=config,
        graph_hash=graph.content_hash(),
        kmed_dev=kres.best_dev,
        kmed_comp=kmed_metrics.mean_compactness,
        kmed_iterations=kres.iterations_run,
        main=PlanOutcome(plan=passengers[0], metrics=main_metrics),
        harvested=harvest_outcomes,
        algorithm_runtime_s=algorithm_seconds,
        harvest_runtime_s=harvest_seconds,
        total_runtime_s=total,
    )


def _run_indexed(args: tuple) -> tuple[int, RunReport]:
    graph, config, index, validate, process_harvested, ingest_seconds = args
    seeded = replace(config, seed=derive_run_seed(config.seed, index))
    return index, run_once(graph, seeded, validate=validate,
                           process_harvested=process_harvested,
                           ingest_seconds=ingest_seconds)


def run_ensemble(graph: DualGraph, config: RunConfig, runs: int, jobs: int = 1,
                 *, validate: bool = False, process_harvested: bool = True,
                 ingest_seconds: float = 0.0) -> list[RunReport]:
    """Run `runs` independent seeds; config.seed acts as the master seed.

    Reports come back ordered by run index and are identical for any `jobs`
    value: each run's seed depends only on (master seed, index).
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    tasks = [(graph, config, i, validate, process_harvested, ingest_seconds)
             for i in range(runs)]
    if jobs <= 1 or runs == 1:
        indexed = [_run_indexed(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            indexed = list(pool.map(_run_indexed, tasks))
    indexed.sort(key=lambda pair: pair[0])
    return [report for _, report in indexed]


def _mean(values: Sequence[float]) -> float:
    return float(sum(values) / len(values))


def summarize(reports: Sequence[RunReport], label: str = "") -> dict:
    """Aggregate an ensemble into the summary-table shape."""
    if not reports:
        raise ValueError("no reports to summarize")
    config = reports[0].config
    kmed_comps = [r.kmed_comp for r in reports]
    main_comps = [r.main.metrics.mean_compactness for r in reports]
    harvest_devs = [o.metrics.dev_percent for r in reports for o in r.harvested]
    harvest_comps = [o.metrics.mean_compactness for r in reports for o in r.harvested]
    summary = {
        "state": label,
        "li": config.li,
        "uc": config.uc.as_text(),
        "nf": config.nf,
        "runs": len(reports),
        "kmed_mean_dev": _mean([r.kmed_dev for r in reports]),
        "kmed_mean_comp": (None if any(c is None for c in kmed_comps)
                           else _mean([c for c in kmed_comps if c is not None])),
        "ls_mean_dev": _mean([r.main.metrics.dev_percent for r in reports]),
        "ls_min_dev": min(r.main.metrics.dev_percent for r in reports),
        "ls_mean_comp": (None if any(c is None for c in main_comps)
                         else _mean([c for c in main_comps if c is not None])),
        "alg_runtime_s": _mean([r.algorithm_runtime_s for r in reports]),
        "total_runtime_s": _mean([r.total_runtime_s for r in reports]),
        "harvest_mean_count": _mean([len(r.harvested) for r in reports]),
        "harvest_mean_dev": (_mean(harvest_devs) if harvest_devs else None),
        "harvest_mean_comp": (None if (not harvest_comps or any(c is None for c in harvest_comps))
                              else _mean([c for c in harvest_comps if c is not None])),
    }
    return summary


SUMMARY_CSV_COLUMNS = ["state", "li", "uc", "nf", "kmed_mean_dev", "kmed_mean_comp",
                       "ls_mean_dev", "ls_min_dev", "ls_mean_comp",
                       "alg_runtime_s", "total_runtime_s"]


def write_summary_csv(path: str | Path, summaries: Sequence[dict]) -> None:
    import csv

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for summary in summaries:
            writer.writerow(summary)


# ----------------------------------------------------------------------
# Plan serialization
# ----------------------------------------------------------------------

class PlanSchemaError(ValueError):
    """Plan file violates the expected schema."""


def plan_document(graph: DualGraph, plan: DistrictingPlan, config: RunConfig | None,
                  seed: int, metrics: PlanMetrics | None) -> dict:
    ids = graph.ids()
    return {
        "graph_hash": graph.content_hash(),
        "k": plan.k,
        "assignment": {ids[v]: int(plan.assignment[v]) for v in range(plan.n)},
        "metrics": metrics.as_dict() if metrics is not None else {},
        "config": config.as_dict() if config is not None else {},
        "seed": seed,
    }


def write_plan(path: str | Path, graph: DualGraph, plan: DistrictingPlan,
               config: RunConfig | None = None, seed: int = 0,
               metrics: PlanMetrics | None = None) -> None:
    """Write a plan JSON; byte-stable for identical inputs (no timestamps)."""
    doc = plan_document(graph, plan, config, seed, metrics)
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_plan(path: str | Path, graph: DualGraph,
              strict_hash: bool = False) -> tuple[DistrictingPlan, dict]:
    """Read and validate a plan JSON against a loaded graph.

    A graph-hash mismatch warns by default (the file may come from an
    equivalent load path) and raises when `strict_hash` is set.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PlanSchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    for key in ("graph_hash", "k", "assignment"):
        if key not in doc:
            raise PlanSchemaError(f"{path}: missing required key {key!r}")
    k = doc["k"]
    if not isinstance(k, int) or k < 1:
        raise PlanSchemaError(f"{path}: 'k' must be a positive integer, got {k!r}")
    if doc["graph_hash"] != graph.content_hash():
        message = (f"{path}: plan graph_hash {doc['graph_hash'][:12]}... does not match "
                   f"the loaded graph {graph.content_hash()[:12]}...")
        if strict_hash:
            raise PlanSchemaError(message)
        logger.warning("%s", message)
    assignment = doc["assignment"]
    ids = graph.ids()
    id_index = {uid: i for i, uid in enumerate(ids)}
    if set(assignment) != set(ids):
        missing = sorted(set(ids) - set(assignment))[:5]
        extra = sorted(set(assignment) - set(ids))[:5]
        raise PlanSchemaError(
            f"{path}: assignment ids do not match the graph (missing {missing}, unknown {extra})")
    plan = DistrictingPlan(graph.populations, k)
    for uid, district in assignment.items():
        if not isinstance(district, int) or not 0 <= district < k:
            raise PlanSchemaError(
                f"{path}: assignment[{uid!r}] = {district!r} is not a district index in [0, {k})")
        plan.assign(id_index[uid], district)
    meta = {"seed": doc.get("seed"), "config": doc.get("config", {}),
            "metrics": doc.get("metrics", {}), "graph_hash": doc["graph_hash"]}
    return plan, meta
