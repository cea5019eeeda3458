"""Dual graph, district plan, and contiguity machinery.

The state is modeled as an undirected graph with one vertex per tabulation
block (TB) and an edge wherever two blocks share a positive-length border.
A districting plan assigns every vertex to one of k districts and keeps a
running population total per district.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

UNASSIGNED = -1

Ring = Sequence[tuple[float, float]]


class DisconnectedGraphError(ValueError):
    """Raised when an operation requires a connected (sub)graph."""


class EmptyDistrictError(ValueError):
    """Raised when a district-level query hits an empty district."""


@dataclass(frozen=True)
class TabulationBlock:
    """One atomic geographic unit: a county, VTD, or merged group."""

    id: str
    population: int
    geometry: tuple[tuple[tuple[float, float], ...], ...] | None = None
    county: str | None = None

    def __post_init__(self):
        if self.population < 0:
            raise ValueError(f"block {self.id!r}: population must be >= 0")
        if self.geometry is not None:
            for ring in self.geometry:
                if len(ring) < 3:
                    raise ValueError(f"block {self.id!r}: ring with < 3 vertices")
                if ring_area(ring) == 0.0:
                    raise ValueError(f"block {self.id!r}: zero-area ring")


def ring_area(ring: Ring) -> float:
    """Unsigned polygon area by the shoelace formula (holes unsupported)."""
    total = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2.0


class DualGraph:
    """Immutable adjacency structure over tabulation blocks.

    Vertices are dense integer indices in input order; external string ids
    live on the blocks. The graph must be connected: partitioning an
    unconnected state is rejected rather than guessed at.
    """

    def __init__(self, blocks: Sequence[TabulationBlock], edges: Iterable[tuple[int, int]],
                 require_connected: bool = True):
        self.blocks = tuple(blocks)
        n = len(self.blocks)
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        self.edges = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.neighbors = tuple(tuple(sorted(a)) for a in nbrs)
        self.populations = np.array([b.population for b in self.blocks], dtype=np.int64)
        self.populations.setflags(write=False)
        if require_connected and n > 0 and not self._connected():
            raise DisconnectedGraphError(
                "dual graph is not connected (island inputs are rejected, not bridged)")

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def total_population(self) -> int:
        return int(self.populations.sum())

    def ids(self) -> tuple[str, ...]:
        return tuple(b.id for b in self.blocks)

    def _connected(self) -> bool:
        seen = bytearray(self.n)
        stack = [0]
        seen[0] = 1
        count = 1
        while stack:
            u = stack.pop()
            for v in self.neighbors[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    stack.append(v)
        return count == self.n

    def content_hash(self) -> str:
        """Stable hex digest of ids, populations, and edge set (geometry excluded)."""
        import hashlib
        import json

        payload = json.dumps(
            {"ids": list(self.ids()),
             "pops": [int(p) for p in self.populations],
             "edges": [list(e) for e in self.edges]},
            separators=(",", ":")).encode()
        return hashlib.sha256(payload).hexdigest()

    def __repr__(self) -> str:
        return f"DualGraph(n={self.n}, edges={len(self.edges)})"


class DistrictingPlan:
    """Assignment of vertices to k districts with cached district populations.

    A plan starts with every vertex UNASSIGNED and is COMPLETE once every
    vertex has a district. The population cache is maintained incrementally
    and can always be cross-checked against a recomputation.
    """

    def __init__(self, populations: np.ndarray, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self._pops = populations
        self.k = k
        self.assignment = np.full(len(populations), UNASSIGNED, dtype=np.int32)
        self.district_pops = np.zeros(k, dtype=np.int64)

    @classmethod
    def from_assignment(cls, graph: DualGraph, labels: Sequence[int], k: int) -> "DistrictingPlan":
        plan = cls(graph.populations, k)
        for v, d in enumerate(labels):
            if d != UNASSIGNED:
                plan.assign(v, int(d))
        return plan

    @property
    def n(self) -> int:
        return len(self.assignment)

    def assign(self, v: int, d: int) -> None:
        if not 0 <= d < self.k:
            raise ValueError(f"district index {d} out of range")
        if self.assignment[v] != UNASSIGNED:
            raise ValueError(f"vertex {v} already assigned")
        self.assignment[v] = d
        self.district_pops[d] += self._pops[v]

    def unassign(self, v: int) -> None:
        d = self.assignment[v]
        if d == UNASSIGNED:
            raise ValueError(f"vertex {v} not assigned")
        self.assignment[v] = UNASSIGNED
        self.district_pops[d] -= self._pops[v]

    def move(self, v: int, to: int) -> None:
        """Reassign v to district `to`, updating both population caches."""
        frm = self.assignment[v]
        if frm == UNASSIGNED:
            raise ValueError(f"vertex {v} not assigned")
        if not 0 <= to < self.k:
            raise ValueError(f"district index {to} out of range")
        self.assignment[v] = to
        self.district_pops[frm] -= self._pops[v]
        self.district_pops[to] += self._pops[v]

    def is_complete(self) -> bool:
        return bool((self.assignment != UNASSIGNED).all())

    def district_vertices(self, d: int) -> list[int]:
        return np.flatnonzero(self.assignment == d).tolist()

    def recompute_pops(self) -> np.ndarray:
        fresh = np.zeros(self.k, dtype=np.int64)
        for d in range(self.k):
            fresh[d] = self._pops[self.assignment == d].sum()
        return fresh

    def copy(self) -> "DistrictingPlan":
        dup = DistrictingPlan(self._pops, self.k)
        dup.assignment = self.assignment.copy()
        dup.district_pops = self.district_pops.copy()
        return dup

    def canonical_labels(self) -> np.ndarray:
        """Assignment vector with districts renamed by their lowest member vertex.

        Two plans describe the same partition iff their canonical labels are
        equal; used to deduplicate harvested plans.
        """
        order = np.full(self.k, -1, dtype=np.int32)
        next_label = 0
        out = np.empty_like(self.assignment)
        for v, d in enumerate(self.assignment):
            if d == UNASSIGNED:
                out[v] = UNASSIGNED
                continue
            if order[d] == -1:
                order[d] = next_label
                next_label += 1
            out[v] = order[d]
        return out

    def __repr__(self) -> str:
        done = int((self.assignment != UNASSIGNED).sum())
        return f"DistrictingPlan(k={self.k}, assigned={done}/{self.n})"


@dataclass(frozen=True)
class Subgraph:
    """Vertex-induced subgraph: a vertex subset plus the edges inside it."""

    vertices: tuple[int, ...]
    adj: dict[int, tuple[int, ...]] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u in self.vertices:
            for v in self.adj[u]:
                if u < v:
                    out.append((u, v))
        return out

    def edge_count(self) -> int:
        return sum(len(self.adj[u]) for u in self.vertices) // 2

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        start = self.vertices[0]
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n


def induced_district_subgraph(graph: DualGraph, plan: DistrictingPlan, d: int) -> Subgraph:
    """Subgraph on exactly the vertices assigned to district d."""
    if not 0 <= d < plan.k:
        raise ValueError(f"district index {d} out of range for k={plan.k}")
    members = plan.district_vertices(d)
    member_set = set(members)
    adj = {u: tuple(v for v in graph.neighbors[u] if v in member_set) for u in members}
    return Subgraph(tuple(members), adj)


def vertex_subgraph(graph: DualGraph, vertices: Iterable[int]) -> Subgraph:
    members = sorted(set(vertices))
    member_set = set(members)
    adj = {u: tuple(v for v in graph.neighbors[u] if v in member_set) for u in members}
    return Subgraph(tuple(members), adj)


def is_contiguous(graph: DualGraph, plan: DistrictingPlan, d: int) -> bool:
    """True iff district d induces a single connected component.

    An empty district is an error, not merely non-contiguous.
    """
    sub = induced_district_subgraph(graph, plan, d)
    if sub.n == 0:
        raise EmptyDistrictError(f"district {d} is empty")
    return sub.is_connected()


def articulation_points(subgraph: Subgraph) -> set[int]:
    """Exact cut-vertex set of a connected subgraph (iterative low-link).

    Iterative rather than recursive so path-shaped districts with thousands
    of vertices cannot blow the interpreter stack.
    """
    if subgraph.n == 0:
        raise ValueError("articulation_points requires a nonempty subgraph")
    if not subgraph.is_connected():
        raise DisconnectedGraphError("articulation_points requires a connected subgraph")

    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    parent: dict[int, int | None] = {}
    points: set[int] = set()
    counter = 0

    root = subgraph.vertices[0]
    parent[root] = None
    # Stack entries are (vertex, iterator over its neighbors).
    stack = [(root, iter(subgraph.adj[root]))]
    disc[root] = low[root] = counter
    counter += 1
    root_children = 0

    while stack:
        u, it = stack[-1]
        advanced = False
        for v in it:
            if v not in disc:
                parent[v] = u
                if u == root:
                    root_children += 1
                disc[v] = low[v] = counter
                counter += 1
                stack.append((v, iter(subgraph.adj[v])))
                advanced = True
                break
            elif v != parent[u]:
                low[u] = min(low[u], disc[v])
        if not advanced:
            stack.pop()
            p = parent[u]
            if p is not None:
                low[p] = min(low[p], low[u])
                if p != root and low[u] >= disc[p]:
                    points.add(p)
    if root_children > 1:
        points.add(root)
    return points


def border_pairs(graph: DualGraph, plan: DistrictingPlan) -> list[tuple[int, int, int]]:
    """All adjacent district pairs as (heavier, lighter, population disparity).

    Sorted by descending disparity; ties broken by (smaller heavy index,
    smaller light index) so the walk order is deterministic. Equal
    populations orient the smaller district index as the heavy side.
    """
    if not plan.is_complete():
        raise ValueError("border_pairs requires a COMPLETE plan")
    touching: set[tuple[int, int]] = set()
    assignment = plan.assignment
    for u, v in graph.edges:
        du, dv = int(assignment[u]), int(assignment[v])
        if du != dv:
            touching.add((du, dv) if du < dv else (dv, du))
    pops = plan.district_pops
    out = []
    for a, b in touching:
        if pops[a] >= pops[b]:
            heavy, light = a, b
        else:
            heavy, light = b, a
        out.append((heavy, light, int(pops[heavy] - pops[light])))
    out.sort(key=lambda t: (-t[2], t[0], t[1]))
    return out


def validate_plan(graph: DualGraph, plan: DistrictingPlan) -> None:
    """Assert completeness, cache coherence, population conservation, and
    per-district contiguity. Used by tests and assertion-mode pipelines."""
    if not plan.is_complete():
        raise AssertionError("plan has UNASSIGNED vertices")
    fresh = plan.recompute_pops()
    if not np.array_equal(fresh, plan.district_pops):
        raise AssertionError("district population cache out of sync")
    if int(fresh.sum()) != graph.total_population:
        raise AssertionError("plan does not conserve total population")
    for d in range(plan.k):
        if not is_contiguous(graph, plan, d):
            raise AssertionError(f"district {d} is not contiguous")
