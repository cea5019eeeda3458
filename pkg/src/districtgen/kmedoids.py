"""Plan generation by k-medoids district growth.

One iteration grows districts outward from k medoid vertices, smallest
district first, one breadth-first frontier at a time, capped at the ideal
district population; whatever cannot be placed under the cap is swept into
the adjacent district with the least population. Each district's medoid is
then re-centered on a uniformly random spanning tree of the district (walk
toward the dominant branch), all non-medoid vertices are unassigned, and
the process repeats. The lowest-deviation plan over all iterations wins;
iterations whose deviation beats a harvest threshold are also kept as
additional plans for independent refinement.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import (DisconnectedGraphError, DistrictingPlan, DualGraph, Subgraph,
                    UNASSIGNED, induced_district_subgraph, validate_plan)
from .metrics import deviation


def grow_districts(graph: DualGraph, medoids: list[int]) -> DistrictingPlan:
    """Grow one complete, contiguous plan from medoid singletons.

    Loop: take the district with the lowest population (ties to the lower
    district index), expand it by one BFS frontier (its unassigned
    neighbors, in ascending vertex index), skipping vertices that would push
    the district past the ideal population. When no district can add any
    vertex under the cap, the capped phase ends and remaining vertices are
    swept onto their adjacent district of least population until none are
    left; sweeps repeat because each assignment creates new adjacencies.
    """
    k = len(medoids)
    n = graph.n
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= {n} medoids, got {k}")
    if len(set(medoids)) != k:
        raise ValueError("medoids must be distinct")
    plan = DistrictingPlan(graph.populations, k)
    members: list[list[int]] = [[] for _ in range(k)]
    for d, m in enumerate(medoids):
        plan.assign(m, d)
        members[d].append(m)
    cap = graph.total_population / k
    pops = graph.populations
    assignment = plan.assignment
    unassigned = n - k

    while unassigned:
        progressed = False
        for d in sorted(range(k), key=lambda i: (plan.district_pops[i], i)):
            frontier = sorted({v for u in members[d] for v in graph.neighbors[u]
                               if assignment[v] == UNASSIGNED})
            added = False
            for v in frontier:
                if plan.district_pops[d] + pops[v] <= cap:
                    plan.assign(v, d)
                    members[d].append(v)
                    unassigned -= 1
                    added = True
            if added:
                progressed = True
                break
        if progressed:
            continue
        # Capped phase over: sweep leftovers onto the lightest adjacent district.
        while unassigned:
            swept = False
            for v in range(n):
                if assignment[v] != UNASSIGNED:
                    continue
                adjacent = {int(assignment[u]) for u in graph.neighbors[v]
                            if assignment[u] != UNASSIGNED}
                if not adjacent:
                    continue
                target = min(adjacent, key=lambda i: (plan.district_pops[i], i))
                plan.assign(v, target)
                members[target].append(v)
                unassigned -= 1
                swept = True
            if not swept:
                raise RuntimeError("sweep stalled; graph is not connected")
        break
    return plan


class _UniformStream:
    """Batched uniform(0,1) draws; one Generator call per refill."""

    __slots__ = ("rng", "_buf", "_pos", "_size")

    def __init__(self, rng: np.random.Generator, size: int = 1024):
        self.rng = rng
        self._size = size
        self._buf = rng.random(size)
        self._pos = 0

    def next(self) -> float:
        if self._pos >= self._size:
            self._buf = self.rng.random(self._size)
            self._pos = 0
        value = self._buf[self._pos]
        self._pos += 1
        return value


def broder_spanning_tree(subgraph: Subgraph, rng: np.random.Generator) -> Subgraph:
    """Uniformly random spanning tree via the random-walk construction.

    Walk from a fixed start vertex; the first-entry edge of every vertex
    joins the tree. Stopping once all vertices are visited yields a uniform
    spanning tree regardless of the start.
    """
    verts = subgraph.vertices
    if not verts:
        raise ValueError("empty subgraph has no spanning tree")
    if len(verts) == 1:
        return Subgraph(verts, {verts[0]: ()})
    if not subgraph.is_connected():
        raise DisconnectedGraphError("spanning tree requires a connected subgraph")

    tree_adj: dict[int, list[int]] = {v: [] for v in verts}
    visited = {verts[0]}
    remaining = len(verts) - 1
    cur = verts[0]
    uniforms = _UniformStream(rng, size=max(256, 4 * len(verts)))
    while remaining:
        nbrs = subgraph.adj[cur]
        nxt = nbrs[int(uniforms.next() * len(nbrs))]
        if nxt not in visited:
            visited.add(nxt)
            remaining -= 1
            tree_adj[cur].append(nxt)
            tree_adj[nxt].append(cur)
        cur = nxt
    return Subgraph(verts, {v: tuple(sorted(a)) for v, a in tree_adj.items()})


def _branch_weights(tree: Subgraph, root: int) -> dict[int, int]:
    """Weight per neighbor of root: edges in that branch plus the connecting
    edge, i.e. the vertex count of the branch component."""
    weights: dict[int, int] = {}
    for first in tree.adj[root]:
        count = 0
        stack = [(first, root)]
        while stack:
            u, parent = stack.pop()
            count += 1
            for v in tree.adj[u]:
                if v != parent:
                    stack.append((v, u))
        weights[first] = count
    return weights


def _leaf_path_weights(tree: Subgraph, root: int) -> list[tuple[int, int]]:
    """(first-step neighbor, path edge count) for every root-to-leaf path."""
    out: list[tuple[int, int]] = []
    for first in tree.adj[root]:
        stack = [(first, root, 1)]
        while stack:
            u, parent, depth = stack.pop()
            children = [v for v in tree.adj[u] if v != parent]
            if not children:
                out.append((first, depth))
            for v in children:
                stack.append((v, u, depth + 1))
    return out


def recenter_medoid(tree: Subgraph, medoid: int, mode: str = "branch") -> int:
    """Walk the medoid toward the dominant side of the tree.

    In the default ``branch`` reading, each neighbor of the medoid owns a
    branch whose weight counts its edges plus the connecting edge; when one
    branch outweighs all others combined, the medoid moves one step into it.
    The ``leaf_paths`` reading weighs every medoid-to-leaf path instead (the
    two agree on path graphs). A move is only taken while it strictly
    decreases the maximum weight, which breaks the two-vertex ping-pong that
    the bare dominance rule allows on even splits.
    """
    if medoid not in tree.adj:
        raise ValueError(f"medoid {medoid} is not a tree vertex")
    if mode not in ("branch", "leaf_paths"):
        raise ValueError(f"unknown medoid mode {mode!r}")

    def dominant_step(root: int) -> tuple[int | None, int]:
        if mode == "branch":
            weights = _branch_weights(tree, root)
            if not weights:
                return None, 0
            best = max(weights.items(), key=lambda kv: kv[1])
            total = sum(weights.values())
            if best[1] > total - best[1]:
                return best[0], best[1]
            return None, best[1]
        paths = _leaf_path_weights(tree, root)
        if not paths:
            return None, 0
        best = max(paths, key=lambda fw: fw[1])
        total = sum(w for _, w in paths)
        if best[1] > total - best[1]:
            return best[0], best[1]
        return None, best[1]

    current = medoid
    step, weight = dominant_step(current)
    while step is not None:
        next_step, next_weight = dominant_step(step)
        if next_weight >= weight:
            break
        current = step
        step, weight = next_step, next_weight
    return current


@dataclass
class KMedoidsResult:
    best_plan: DistrictingPlan
    best_dev: float
    iterations_run: int
    harvested_plans: list[DistrictingPlan] = field(default_factory=list)


def run_kmedoids(graph: DualGraph, k: int, rng: np.random.Generator,
                 max_iterations: int = 100, dev_target: float = 1.0,
                 harvest_threshold: float = 5.0, medoid_mode: str = "branch",
                 validate: bool = False) -> KMedoidsResult:
    """Iterate grow / re-center until the deviation target or iteration cap.

    Medoids are seeded uniformly at random without replacement. Every
    iteration's plan is scored; plans under the harvest threshold are kept,
    deduplicated by canonical assignment. The run is bit-deterministic for
    a fixed generator state.
    """
    if k > graph.n:
        raise ValueError(f"k={k} exceeds vertex count {graph.n}")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    medoids = [int(v) for v in rng.choice(graph.n, size=k, replace=False)]

    best_plan: DistrictingPlan | None = None
    best_dev = float("inf")
    harvested: dict[bytes, DistrictingPlan] = {}
    iterations = 0

    while True:
        iterations += 1
        plan = grow_districts(graph, medoids)
        if validate:
            validate_plan(graph, plan)
        dev = deviation(graph, plan)
        if dev < harvest_threshold:
            key = plan.canonical_labels().tobytes()
            if key not in harvested:
                harvested[key] = plan.copy()
        if dev < best_dev:
            best_plan = plan.copy()
            best_dev = dev
        if not (dev > dev_target) or iterations >= max_iterations:
            break
        new_medoids = []
        for d in range(k):
            sub = induced_district_subgraph(graph, plan, d)
            tree = broder_spanning_tree(sub, rng)
            assert tree.edge_count() == sub.n - 1, "spanning tree edge count"
            new_medoids.append(recenter_medoid(tree, medoids[d], mode=medoid_mode))
        medoids = new_medoids

    assert best_plan is not None
    return KMedoidsResult(
        best_plan=best_plan,
        best_dev=best_dev,
        iterations_run=iterations,
        harvested_plans=list(harvested.values()),
    )
