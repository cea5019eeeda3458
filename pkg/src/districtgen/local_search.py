"""Tabu-guarded Flip/Swap refinement of a completed plan.

Each iteration targets the adjacent district pair with the largest
population disparity (walking down the pair list until some pair offers a
usable move). Flip moves one border vertex from the heavier district to the
lighter; Swap exchanges a border pair; CMB draws from both sets. The move
minimizing the pairwise balance objective is applied, and its key (vertex
set plus district pair, shared with the inverse move) goes on a tabu list
for floor(0.1 * LI) iterations so a block cannot cycle between districts.
Articulation points never move, keeping every district contiguous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import (DistrictingPlan, DualGraph, articulation_points, border_pairs,
                    induced_district_subgraph, validate_plan)
from .metrics import deviation

NEIGHBORHOODS = ("flip", "swap", "cmb")


@dataclass(frozen=True)
class Move:
    """v_out leaves the heavier district d_m for d_l; v_in (None for a Flip,
    standing in for the zero-population dummy vertex) goes the other way."""

    v_out: int
    v_in: int | None
    d_m: int
    d_l: int

    @property
    def is_swap(self) -> bool:
        return self.v_in is not None

    def key(self) -> tuple:
        vertices = (self.v_out,) if self.v_in is None else tuple(sorted((self.v_out, self.v_in)))
        districts = tuple(sorted((self.d_m, self.d_l)))
        return vertices, districts


def score_move(plan: DistrictingPlan, move: Move) -> float:
    """Pairwise objective after the move: the larger of the two districts'
    absolute fractional deviations from the ideal population."""
    pops = plan._pops
    out_pop = int(pops[move.v_out])
    in_pop = int(pops[move.v_in]) if move.v_in is not None else 0
    ideal = int(plan.district_pops.sum()) / plan.k
    new_m = int(plan.district_pops[move.d_m]) - out_pop + in_pop
    new_l = int(plan.district_pops[move.d_l]) + out_pop - in_pop
    return max(abs(new_m - ideal), abs(new_l - ideal)) / ideal


def _border_vertices(graph: DualGraph, plan: DistrictingPlan, d_from: int, d_to: int) -> list[int]:
    """Vertices of d_from adjacent to at least one vertex of d_to."""
    assignment = plan.assignment
    out = []
    for v in plan.district_vertices(d_from):
        for u in graph.neighbors[v]:
            if assignment[u] == d_to:
                out.append(v)
                break
    return out


def flip_candidates(graph: DualGraph, plan: DistrictingPlan, d_m: int, d_l: int) -> list[Move]:
    """Border vertices of d_m that are not articulation points of d_m and
    whose departure would not empty it, paired with the dummy vertex."""
    sub_m = induced_district_subgraph(graph, plan, d_m)
    if sub_m.n <= 1:
        return []
    cut = articulation_points(sub_m)
    return [Move(v, None, d_m, d_l)
            for v in _border_vertices(graph, plan, d_m, d_l)
            if v not in cut]


def swap_candidates(graph: DualGraph, plan: DistrictingPlan, d_m: int, d_l: int) -> list[Move]:
    """Pairs (v_i in d_m, v_j in d_l), neither an articulation point of its
    district, where v_i borders d_l minus v_j and v_j borders d_m minus v_i.

    Those conditions are necessary for contiguity but not quite sufficient,
    so the searcher re-verifies contiguity after the hypothetical exchange
    before accepting any swap.
    """
    assignment = plan.assignment
    cut_m = articulation_points(induced_district_subgraph(graph, plan, d_m))
    cut_l = articulation_points(induced_district_subgraph(graph, plan, d_l))
    side_m = [v for v in _border_vertices(graph, plan, d_m, d_l) if v not in cut_m]
    side_l = [v for v in _border_vertices(graph, plan, d_l, d_m) if v not in cut_l]
    if not side_m or not side_l:
        return []
    nbrs_in_l = {v: [u for u in graph.neighbors[v] if assignment[u] == d_l] for v in side_m}
    nbrs_in_m = {v: [u for u in graph.neighbors[v] if assignment[u] == d_m] for v in side_l}
    moves = []
    for vi in side_m:
        for vj in side_l:
            link_i = nbrs_in_l[vi]
            if not (len(link_i) > 1 or (link_i and link_i[0] != vj)):
                continue
            link_j = nbrs_in_m[vj]
            if not (len(link_j) > 1 or (link_j and link_j[0] != vi)):
                continue
            moves.append(Move(vi, vj, d_m, d_l))
    return moves


def _connected_vertex_set(graph: DualGraph, vertices: set[int]) -> bool:
    if not vertices:
        return False
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in graph.neighbors[u]:
            if v in vertices and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(vertices)


def _swap_keeps_contiguity(graph: DualGraph, plan: DistrictingPlan, move: Move) -> bool:
    members_m = set(plan.district_vertices(move.d_m))
    members_l = set(plan.district_vertices(move.d_l))
    members_m.discard(move.v_out)
    members_m.add(move.v_in)  # type: ignore[arg-type]
    members_l.discard(move.v_in)  # type: ignore[arg-type]
    members_l.add(move.v_out)
    return _connected_vertex_set(graph, members_m) and _connected_vertex_set(graph, members_l)


@dataclass(frozen=True)
class TraceStep:
    pair: tuple[int, int]
    move: Move
    dev_after: float


@dataclass
class LocalSearchTrace:
    steps: list[TraceStep] = field(default_factory=list)
    plan: DistrictingPlan | None = None
    final_dev: float = float("nan")
    iterations: int = 0


def local_search(graph: DualGraph, plan: DistrictingPlan, max_iterations: int,
                 neighborhood: str = "cmb", dev_target: float = 1.0,
                 validate: bool = False) -> LocalSearchTrace:
    """Refine `plan` in place for at most `max_iterations` applied moves.

    Iterations count applied moves; walking past pairs that offer no valid
    move costs nothing. Stops early once the deviation no longer exceeds
    `dev_target` or no pair anywhere admits a valid, non-tabu,
    contiguity-preserving move. The search itself is deterministic: pair
    order, scoring, and tie-breaks (Flip before Swap, then lowest vertex
    indices) are all fixed.
    """
    if neighborhood not in NEIGHBORHOODS:
        raise ValueError(f"neighborhood must be one of {NEIGHBORHOODS}")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if not plan.is_complete():
        raise ValueError("local search requires a COMPLETE plan")

    tenure = math.floor(0.1 * max_iterations)
    tabu_until: dict[tuple, int] = {}
    trace = LocalSearchTrace(plan=plan)
    iterations = 0
    dev = deviation(graph, plan)

    while dev > dev_target and iterations < max_iterations:
        current_iter = iterations + 1
        applied_move: Move | None = None
        applied_pair: tuple[int, int] | None = None
        for d_m, d_l, _disparity in border_pairs(graph, plan):
            candidates: list[Move] = []
            if neighborhood in ("flip", "cmb"):
                candidates.extend(flip_candidates(graph, plan, d_m, d_l))
            if neighborhood in ("swap", "cmb"):
                candidates.extend(swap_candidates(graph, plan, d_m, d_l))
            candidates = [m for m in candidates
                          if tabu_until.get(m.key(), 0) < current_iter]
            if not candidates:
                continue
            ranked = sorted(
                candidates,
                key=lambda m: (score_move(plan, m), m.is_swap, m.v_out,
                               -1 if m.v_in is None else m.v_in))
            for move in ranked:
                if move.is_swap and not _swap_keeps_contiguity(graph, plan, move):
                    continue
                applied_move = move
                applied_pair = (d_m, d_l)
                break
            if applied_move is not None:
                break
        if applied_move is None:
            break  # no pair admits any move: search is stuck

        plan.move(applied_move.v_out, applied_move.d_l)
        if applied_move.v_in is not None:
            plan.move(applied_move.v_in, applied_move.d_m)
        tabu_until[applied_move.key()] = current_iter + tenure
        iterations = current_iter
        dev = deviation(graph, plan)
        trace.steps.append(TraceStep(pair=applied_pair, move=applied_move, dev_after=dev))
        if validate:
            validate_plan(graph, plan)

    trace.final_dev = dev
    trace.iterations = iterations
    return trace
