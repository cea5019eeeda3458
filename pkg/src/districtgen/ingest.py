"""Build the dual graph from population and geometry files.

Input formats:

* population CSV with header ``id,population[,county]`` (UTF-8);
* geometry as a GeoJSON FeatureCollection whose feature property ``id``
  matches the CSV ids; Polygon and MultiPolygon geometries accepted,
  interior rings (holes) rejected;
* alternatively a single adjacency JSON
  ``{"vertices": [{"id", "population", "county"?}], "edges": [[i, j], ...]}``
  that bypasses geometric adjacency entirely (trusted adjacency data).

Adjacency between polygons uses the rook rule: two units are neighbors only
if they share a border of nonzero length; corner-point contact does not
count. Detection matches polygon edge segments exactly after quantizing
coordinates, which is reliable for census-style inputs where neighboring
rings share identical vertex chains. No reprojection is done; coordinates
are taken as-is.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

from .graph import DualGraph, TabulationBlock, ring_area


class IngestError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class RawUnit:
    """One input unit before graph construction."""

    id: str
    population: int
    county: str | None = None
    polygons: tuple[tuple[tuple[float, float], ...], ...] | None = None


@dataclass(frozen=True)
class LoadedGraph:
    graph: DualGraph
    provenance: dict


def read_population_csv(path: str | Path) -> list[RawUnit]:
    path = Path(path)
    units: list[RawUnit] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty population file") from None
        header = [h.strip().lower() for h in header]
        if header[:2] != ["id", "population"] or len(header) > 3 or (
                len(header) == 3 and header[2] != "county"):
            raise IngestError(f"{path}: expected header 'id,population[,county]', got {header}")
        has_county = len(header) == 3
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            uid = row[0].strip()
            if not uid:
                raise IngestError(f"{path}:{lineno}: empty id")
            if uid in seen:
                raise IngestError(f"{path}:{lineno}: duplicate id {uid!r}")
            seen.add(uid)
            try:
                pop = int(row[1])
            except ValueError:
                raise IngestError(f"{path}:{lineno}: population {row[1]!r} is not an integer") from None
            if pop < 0:
                raise IngestError(f"{path}:{lineno}: negative population for {uid!r}")
            county = row[2].strip() if has_county else None
            units.append(RawUnit(id=uid, population=pop, county=county))
    if not units:
        raise IngestError(f"{path}: no data rows")
    return units


def _close_ring(coords: list) -> tuple[tuple[float, float], ...]:
    ring = [(float(x), float(y)) for x, y in coords]
    if len(ring) >= 2 and ring[0] == ring[-1]:
        ring = ring[:-1]
    if len(ring) < 3:
        raise IngestError(f"ring with fewer than 3 distinct vertices: {ring}")
    if ring_area(ring) == 0.0:
        raise IngestError("zero-area ring")
    return tuple(ring)


def _polygon_rings(geometry: dict, feature_id: str) -> list[tuple[tuple[float, float], ...]]:
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        poly_list = [coords]
    elif gtype == "MultiPolygon":
        poly_list = coords
    else:
        raise IngestError(f"feature {feature_id!r}: unsupported geometry type {gtype!r}")
    rings = []
    for poly in poly_list:
        if len(poly) > 1:
            raise IngestError(f"feature {feature_id!r}: interior rings (holes) are unsupported")
        rings.append(_close_ring(poly[0]))
    return rings


def read_geometry_geojson(path: str | Path) -> dict[str, tuple[tuple[tuple[float, float], ...], ...]]:
    """Map unit id -> tuple of polygon rings."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if doc.get("type") != "FeatureCollection":
        raise IngestError(f"{path}: expected a GeoJSON FeatureCollection")
    out: dict[str, tuple[tuple[tuple[float, float], ...], ...]] = {}
    for feature in doc.get("features", []):
        props = feature.get("properties") or {}
        fid = props.get("id")
        if fid is None:
            raise IngestError(f"{path}: feature without an 'id' property")
        fid = str(fid)
        if fid in out:
            raise IngestError(f"{path}: duplicate feature id {fid!r}")
        out[fid] = tuple(_polygon_rings(feature.get("geometry") or {}, fid))
    if not out:
        raise IngestError(f"{path}: no features")
    return out


def attach_geometry(units: list[RawUnit],
                    geometries: dict[str, tuple[tuple[tuple[float, float], ...], ...]]) -> list[RawUnit]:
    unit_ids = {u.id for u in units}
    geo_ids = set(geometries)
    if unit_ids != geo_ids:
        missing = sorted(unit_ids - geo_ids)[:5]
        extra = sorted(geo_ids - unit_ids)[:5]
        raise IngestError(
            f"id mismatch between population and geometry files: "
            f"missing geometry for {missing}, unmatched features {extra}")
    return [replace(u, polygons=geometries[u.id]) for u in units]


# ----------------------------------------------------------------------
# Rook adjacency
# ----------------------------------------------------------------------

def _quantize(value: float, precision: int) -> float:
    q = round(value, precision)
    return 0.0 if q == 0.0 else q  # fold -0.0


def rook_adjacency(units: list[RawUnit], precision: int = 7) -> set[tuple[int, int]]:
    """Edges {i, j} between units sharing at least one polygon edge segment.

    Segments are matched exactly after quantizing coordinates to `precision`
    decimal places; a shared segment has positive length, so corner-only
    contact is never reported.
    """
    segment_owners: dict[tuple, set[int]] = {}
    for idx, unit in enumerate(units):
        if unit.polygons is None:
            raise IngestError(f"unit {unit.id!r} has no geometry")
        for ring in unit.polygons:
            if len(ring) < 3:
                raise IngestError(f"unit {unit.id!r}: malformed ring")
            n = len(ring)
            for i in range(n):
                x0, y0 = ring[i]
                x1, y1 = ring[(i + 1) % n]
                a = (_quantize(x0, precision), _quantize(y0, precision))
                b = (_quantize(x1, precision), _quantize(y1, precision))
                if a == b:
                    continue
                key = (a, b) if a < b else (b, a)
                segment_owners.setdefault(key, set()).add(idx)
    edges: set[tuple[int, int]] = set()
    for owners in segment_owners.values():
        if len(owners) >= 2:
            owner_list = sorted(owners)
            for i, u in enumerate(owner_list):
                for v in owner_list[i + 1:]:
                    edges.add((u, v))
    return edges


# ----------------------------------------------------------------------
# County pre-merge
# ----------------------------------------------------------------------

def county_premerge(units: list[RawUnit], k: int) -> list[RawUnit]:
    """Merge every county whose total population is below the ideal district
    population into a single unit; counties at or above it pass through.

    The merged unit concatenates its members' polygons (no boolean union);
    areas stay exact because census units tile the plane. Relative order of
    first county occurrence is preserved.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    for u in units:
        if not u.county:
            raise IngestError(f"unit {u.id!r} has no county tag; cannot pre-merge")
    ideal = sum(u.population for u in units) / k

    county_order: list[str] = []
    by_county: dict[str, list[RawUnit]] = {}
    for u in units:
        if u.county not in by_county:
            county_order.append(u.county)
            by_county[u.county] = []
        by_county[u.county].append(u)

    out: list[RawUnit] = []
    for county in county_order:
        members = by_county[county]
        total = sum(u.population for u in members)
        if total >= ideal or len(members) == 1:
            out.extend(members)
            continue
        polygons: list[tuple[tuple[float, float], ...]] = []
        any_missing = any(u.polygons is None for u in members)
        if not any_missing:
            for u in members:
                polygons.extend(u.polygons)  # type: ignore[arg-type]
        out.append(RawUnit(
            id=f"county:{county}",
            population=total,
            county=county,
            polygons=None if any_missing else tuple(polygons),
        ))
    return out


# ----------------------------------------------------------------------
# Graph assembly
# ----------------------------------------------------------------------

def build_graph(units: list[RawUnit], edges: set[tuple[int, int]] | None = None,
                precision: int = 7) -> DualGraph:
    """Assemble a DualGraph from units, deriving rook adjacency when no
    explicit edge set is supplied."""
    if edges is None:
        edges = rook_adjacency(units, precision=precision)
    blocks = [TabulationBlock(id=u.id, population=u.population,
                              geometry=u.polygons, county=u.county)
              for u in units]
    return DualGraph(blocks, sorted(edges))


def read_adjacency_json(path: str | Path) -> DualGraph:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise IngestError(f"{path}: expected keys 'vertices' and 'edges'")
    blocks = []
    seen: set[str] = set()
    for i, vtx in enumerate(doc["vertices"]):
        if "id" not in vtx or "population" not in vtx:
            raise IngestError(f"{path}: vertex {i} must have 'id' and 'population'")
        uid = str(vtx["id"])
        if uid in seen:
            raise IngestError(f"{path}: duplicate vertex id {uid!r}")
        seen.add(uid)
        pop = vtx["population"]
        if not isinstance(pop, int) or pop < 0:
            raise IngestError(f"{path}: vertex {uid!r} population must be a nonnegative integer")
        blocks.append(TabulationBlock(id=uid, population=pop, county=vtx.get("county")))
    n = len(blocks)
    edges = []
    for e in doc["edges"]:
        if len(e) != 2:
            raise IngestError(f"{path}: edge {e} must be a pair")
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise IngestError(f"{path}: bad edge [{u}, {v}]")
        edges.append((u, v))
    return DualGraph(blocks, edges)


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def load_graph(population_file: str | Path | None = None,
               geometry_file: str | Path | None = None,
               adjacency_file: str | Path | None = None,
               precision: int = 7) -> LoadedGraph:
    """Load and validate a connected DualGraph, recording input file hashes.

    Either `adjacency_file` alone, or `population_file` plus (optionally)
    `geometry_file`. Without geometry an explicit adjacency source is
    required, and compactness will be unavailable downstream.
    """
    provenance: dict = {"files": {}}
    if adjacency_file is not None:
        if population_file is not None or geometry_file is not None:
            raise IngestError("give either an adjacency file or population(+geometry) files, not both")
        graph = read_adjacency_json(adjacency_file)
        provenance["files"][str(adjacency_file)] = file_sha256(adjacency_file)
    else:
        if population_file is None or geometry_file is None:
            raise IngestError("population and geometry files are both required without an adjacency file")
        units = read_population_csv(population_file)
        geometries = read_geometry_geojson(geometry_file)
        units = attach_geometry(units, geometries)
        graph = build_graph(units, precision=precision)
        provenance["files"][str(population_file)] = file_sha256(population_file)
        provenance["files"][str(geometry_file)] = file_sha256(geometry_file)
    provenance["graph_hash"] = graph.content_hash()
    return LoadedGraph(graph=graph, provenance=provenance)
