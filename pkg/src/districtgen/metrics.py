"""Population-balance and compactness scoring of completed plans.

Deviation is the maximum absolute percent difference between a district's
population and the ideal population (state total / k). Compactness is the
convex-hull measure: district area divided by the area of the convex hull
of the district's polygon vertices, in [0, 1] with 1 most compact. Both are
computed in the input coordinate system as-is; absolute compactness values
shift with the map projection of the inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import DistrictingPlan, DualGraph, ring_area


def pop_star(graph: DualGraph, k: int) -> float:
    """Ideal district population: total population / k.

    Computed in double precision; census totals are far below 2**53 so the
    quotient is exact up to one rounding.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return graph.total_population / k


def deviation(graph: DualGraph, plan: DistrictingPlan) -> float:
    """Maximum absolute percent deviation of district populations (Dev)."""
    if not plan.is_complete():
        raise ValueError("deviation requires a COMPLETE plan")
    ideal = graph.total_population / plan.k
    return float(np.abs(plan.district_pops - ideal).max() / ideal * 100.0)


def district_deviations(graph: DualGraph, plan: DistrictingPlan) -> list[float]:
    if not plan.is_complete():
        raise ValueError("district_deviations requires a COMPLETE plan")
    ideal = graph.total_population / plan.k
    return [float(abs(p - ideal) / ideal * 100.0) for p in plan.district_pops]


def convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Convex hull by monotone chain, counterclockwise, no duplicate endpoint."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


_CLAMP_TOL = 1e-9


def convex_hull_compactness(polygons: list[tuple[tuple[float, float], ...]]) -> float:
    """Sum of polygon areas over the area of the hull of all their vertices.

    The hull of a polygon equals the hull of its vertex set, so vertices
    suffice. Member polygons are assumed interior-disjoint (census units
    tile the plane); overlaps are not deduplicated.
    """
    if not polygons:
        raise ValueError("no polygons given")
    area = sum(ring_area(ring) for ring in polygons)
    points = [pt for ring in polygons for pt in ring]
    hull = convex_hull([(float(x), float(y)) for x, y in points])
    hull_area = ring_area(hull) if len(hull) >= 3 else 0.0
    if hull_area == 0.0:
        raise ValueError("degenerate district geometry (zero hull area)")
    ratio = area / hull_area
    if ratio > 1.0 + _CLAMP_TOL or ratio < -_CLAMP_TOL:
        raise ValueError(f"compactness ratio {ratio} outside [0, 1]")
    return min(max(ratio, 0.0), 1.0)


def district_compactness(graph: DualGraph, plan: DistrictingPlan, d: int) -> float | None:
    """Convex-hull compactness of district d, or None if any member block
    has no geometry."""
    polygons: list[tuple[tuple[float, float], ...]] = []
    for v in plan.district_vertices(d):
        geom = graph.blocks[v].geometry
        if geom is None:
            return None
        polygons.extend(geom)
    if not polygons:
        return None
    return convex_hull_compactness(polygons)


def mean_compactness(values: list[float | None]) -> float | None:
    """Arithmetic mean of per-district compactness; None if any is absent."""
    if any(v is None for v in values) or not values:
        return None
    return float(np.mean([v for v in values if v is not None]))


@dataclass(frozen=True)
class PlanMetrics:
    pop_star: float
    dev_percent: float
    district_devs: tuple[float, ...]
    mean_compactness: float | None
    district_compactness: tuple[float, ...] | None

    def as_dict(self) -> dict:
        return {
            "pop_star": self.pop_star,
            "dev_percent": self.dev_percent,
            "district_devs": list(self.district_devs),
            "mean_compactness": self.mean_compactness,
            "district_compactness": (None if self.district_compactness is None
                                     else list(self.district_compactness)),
        }


def evaluate_plan(graph: DualGraph, plan: DistrictingPlan) -> PlanMetrics:
    """Score a completed plan: deviation always, compactness when geometry
    is present on every block."""
    devs = district_deviations(graph, plan)
    comps = [district_compactness(graph, plan, d) for d in range(plan.k)]
    if any(c is None for c in comps):
        comp_tuple = None
        mean_comp = None
    else:
        comp_tuple = tuple(float(c) for c in comps)  # type: ignore[arg-type]
        mean_comp = mean_compactness(comps)
    return PlanMetrics(
        pop_star=pop_star(graph, plan.k),
        dev_percent=max(devs),
        district_devs=tuple(devs),
        mean_compactness=mean_comp,
        district_compactness=comp_tuple,
    )
