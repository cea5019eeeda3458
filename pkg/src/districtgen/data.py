"""Access to the bundled Iowa 2010 fixture.

The fixture carries the 99 Iowa counties with their 2010 census populations
and a stylized planar geometry: counties sit on the real county-grid layout
(so the derived rook adjacency matches the real county adjacency), with
sawtooth state borders along the Missouri and Mississippi rivers standing
in for the real riverbank raggedness. The official four-district
congressional plan in force for the 2010 cycle is included as a golden
scoring target.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .ingest import LoadedGraph, load_graph


def data_path(name: str) -> Path:
    path = resources.files("districtgen") / "data" / name
    return Path(str(path))


def iowa_population_csv() -> Path:
    return data_path("iowa2010_population.csv")


def iowa_geojson() -> Path:
    return data_path("iowa2010_counties.geojson")


def iowa_adjacency_json() -> Path:
    return data_path("iowa2010_adjacency.json")


def iowa_official_plan_json() -> Path:
    return data_path("iowa2011_congress_plan.json")


def load_iowa(with_geometry: bool = True) -> LoadedGraph:
    """The bundled Iowa county graph (99 vertices, k=4 is the natural use)."""
    if with_geometry:
        return load_graph(population_file=iowa_population_csv(),
                          geometry_file=iowa_geojson())
    return load_graph(adjacency_file=iowa_adjacency_json())
