"""Command-line driver: single runs, seeded ensembles, plan scoring, and the
county pre-merge preprocessing step.

Examples::

    district run --pop pop.csv --geo geo.geojson --k 4 --li 750 --nf cmb \
        --uc 1 --seed 42 --out out/
    district ensemble --graph adjacency.json --k 4 --runs 100 --jobs 4 \
        --seed 7 --out ensemble_out/
    district score --plan out/plan.json --pop pop.csv --geo geo.geojson
    district premerge --pop vtds.csv --geo vtds.geojson --k 27 --out-prefix merged
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .coarsen import UncoarseningSchedule
from .graph import DualGraph
from .ingest import (IngestError, LoadedGraph, county_premerge, load_graph,
                     read_geometry_geojson, read_population_csv, attach_geometry)
from .metrics import evaluate_plan
from .pipeline import (RunConfig, RunReport, plan_document, read_plan, run_ensemble,
                       run_once, summarize, write_plan, write_summary_csv)


def _add_graph_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--graph", metavar="ADJACENCY_JSON",
                        help="adjacency JSON with inline populations (bypasses geometry)")
    parser.add_argument("--pop", metavar="CSV", help="population CSV: id,population[,county]")
    parser.add_argument("--geo", metavar="GEOJSON", help="GeoJSON FeatureCollection of unit polygons")
    parser.add_argument("--precision", type=int, default=7,
                        help="coordinate quantization (decimal places) for rook adjacency")


def _load_from_args(args: argparse.Namespace) -> tuple[LoadedGraph, float]:
    t0 = time.perf_counter()
    loaded = load_graph(population_file=args.pop, geometry_file=args.geo,
                        adjacency_file=args.graph, precision=args.precision)
    return loaded, time.perf_counter() - t0


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, required=True, help="number of districts")
    parser.add_argument("--mi", type=int, default=100, help="max k-medoids iterations")
    parser.add_argument("--li", type=int, default=750, help="max local search iterations")
    parser.add_argument("--nf", choices=["flip", "swap", "cmb"], default="cmb",
                        help="neighborhood function")
    parser.add_argument("--uc", default="1",
                        help="uncoarsening schedule: UC0..UC6 or fractions like 0.3,0.7,1")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (master seed for ensembles)")
    parser.add_argument("--dev-target", type=float, default=1.0,
                        help="stop refining once deviation drops below this percent")
    parser.add_argument("--harvest-threshold", type=float, default=5.0,
                        help="keep k-medoids plans with deviation under this percent")
    parser.add_argument("--no-harvest", action="store_true",
                        help="skip refining harvested plans")
    parser.add_argument("--medoid-mode", choices=["branch", "leaf_paths"], default="branch",
                        help="dominant-path reading used to re-center medoids")
    parser.add_argument("--label", default=None, help="state label for the summary row")
    parser.add_argument("--out", required=True, metavar="DIR", help="output directory")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        k=args.k, li=args.li, mi=args.mi, nf=args.nf,
        uc=UncoarseningSchedule.parse(args.uc), seed=args.seed,
        dev_target=args.dev_target, harvest_threshold=args.harvest_threshold,
        medoid_mode=args.medoid_mode)


def _label_from_args(args: argparse.Namespace) -> str:
    if args.label:
        return args.label
    source = args.graph or args.pop
    return Path(source).stem if source else "graph"


def _report_json(report: RunReport) -> dict:
    return {
        "config": report.config.as_dict(),
        "graph_hash": report.graph_hash,
        "kmed": {"dev_percent": report.kmed_dev, "mean_compactness": report.kmed_comp,
                 "iterations": report.kmed_iterations},
        "final": report.main.metrics.as_dict(),
        "harvested": [o.metrics.as_dict() for o in report.harvested],
        "timings": {"algorithm_runtime_s": report.algorithm_runtime_s,
                    "harvest_runtime_s": report.harvest_runtime_s,
                    "total_runtime_s": report.total_runtime_s},
    }


def _write_run_outputs(out_dir: Path, graph: DualGraph, report: RunReport) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_plan(out_dir / "plan.json", graph, report.main.plan,
               config=report.config, seed=report.config.seed, metrics=report.main.metrics)
    for i, outcome in enumerate(report.harvested):
        write_plan(out_dir / f"harvest_{i:02d}.json", graph, outcome.plan,
                   config=report.config, seed=report.config.seed, metrics=outcome.metrics)
    with (out_dir / "report.json").open("w", encoding="utf-8") as fh:
        json.dump(_report_json(report), fh, indent=2)
        fh.write("\n")


def _cmd_run(args: argparse.Namespace) -> int:
    loaded, ingest_s = _load_from_args(args)
    config = _config_from_args(args)
    report = run_once(loaded.graph, config, process_harvested=not args.no_harvest,
                      ingest_seconds=ingest_s)
    _write_run_outputs(Path(args.out), loaded.graph, report)
    print(f"final Dev {report.main.metrics.dev_percent:.3f}%  "
          f"compactness {report.main.metrics.mean_compactness}  "
          f"harvested {len(report.harvested)}  "
          f"algorithm {report.algorithm_runtime_s:.2f}s total {report.total_runtime_s:.2f}s")
    return 0


def _cmd_ensemble(args: argparse.Namespace) -> int:
    loaded, ingest_s = _load_from_args(args)
    config = _config_from_args(args)
    reports = run_ensemble(loaded.graph, config, runs=args.runs, jobs=args.jobs,
                           process_harvested=not args.no_harvest, ingest_seconds=ingest_s)
    out_dir = Path(args.out)
    for i, report in enumerate(reports):
        _write_run_outputs(out_dir / f"run_{i:03d}", loaded.graph, report)
    summary = summarize(reports, label=_label_from_args(args))
    write_summary_csv(out_dir / "summary.csv", [summary])
    print(f"{summary['state']}: ls_mean_dev {summary['ls_mean_dev']:.3f}%  "
          f"ls_min_dev {summary['ls_min_dev']:.3f}%  "
          f"kmed_mean_dev {summary['kmed_mean_dev']:.3f}%  "
          f"mean_comp {summary['ls_mean_comp']}  "
          f"harvest/run {summary['harvest_mean_count']:.2f}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    loaded, _ = _load_from_args(args)
    plan, meta = read_plan(args.plan, loaded.graph, strict_hash=args.strict_hash)
    metrics = evaluate_plan(loaded.graph, plan)
    doc = {"plan": str(args.plan), "graph_hash": loaded.graph.content_hash(),
           "metrics": metrics.as_dict(), "stored_metrics": meta.get("metrics", {})}
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_premerge(args: argparse.Namespace) -> int:
    units = read_population_csv(args.pop)
    if args.geo:
        units = attach_geometry(units, read_geometry_geojson(args.geo))
    merged = county_premerge(units, args.k)
    prefix = Path(args.out_prefix)
    pop_path = prefix.with_name(prefix.name + "_population.csv")
    with pop_path.open("w", encoding="utf-8") as fh:
        fh.write("id,population,county\n")
        for unit in merged:
            fh.write(f"{unit.id},{unit.population},{unit.county}\n")
    written = [str(pop_path)]
    if args.geo:
        features = []
        for unit in merged:
            assert unit.polygons is not None
            rings = [[list(pt) for pt in ring] + [list(ring[0])] for ring in unit.polygons]
            geometry = ({"type": "Polygon", "coordinates": rings} if len(rings) == 1
                        else {"type": "MultiPolygon", "coordinates": [[r] for r in rings]})
            features.append({"type": "Feature", "properties": {"id": unit.id},
                             "geometry": geometry})
        geo_path = prefix.with_name(prefix.name + "_geometry.geojson")
        with geo_path.open("w", encoding="utf-8") as fh:
            json.dump({"type": "FeatureCollection", "features": features}, fh)
            fh.write("\n")
        written.append(str(geo_path))
    print(f"{len(units)} units -> {len(merged)} units; wrote {', '.join(written)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="district",
        description="Generate contiguous, population-balanced districting plans.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="one seeded generation run")
    _add_graph_arguments(run_p)
    _add_run_arguments(run_p)
    run_p.set_defaults(func=_cmd_run)

    ens_p = sub.add_parser("ensemble", help="many runs with derived seeds plus a summary")
    _add_graph_arguments(ens_p)
    _add_run_arguments(ens_p)
    ens_p.add_argument("--runs", type=int, required=True, help="number of runs")
    ens_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    ens_p.set_defaults(func=_cmd_ensemble)

    score_p = sub.add_parser("score", help="recompute metrics for a stored plan")
    _add_graph_arguments(score_p)
    score_p.add_argument("--plan", required=True, help="plan JSON to score")
    score_p.add_argument("--strict-hash", action="store_true",
                         help="fail instead of warning on a graph hash mismatch")
    score_p.add_argument("--out", help="also write the metrics JSON here")
    score_p.set_defaults(func=_cmd_score)

    pre_p = sub.add_parser("premerge", help="merge sub-ideal-population counties into single units")
    pre_p.add_argument("--pop", required=True, help="population CSV with county column")
    pre_p.add_argument("--geo", help="optional GeoJSON to merge alongside")
    pre_p.add_argument("--k", type=int, required=True, help="number of districts")
    pre_p.add_argument("--out-prefix", required=True, help="output path prefix")
    pre_p.set_defaults(func=_cmd_premerge)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
