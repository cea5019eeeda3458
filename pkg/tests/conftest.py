from __future__ import annotations

import numpy as np
import pytest

from districtgen.data import load_iowa
from districtgen.graph import DistrictingPlan, DualGraph, TabulationBlock


def make_graph(pops, edges) -> DualGraph:
    blocks = [TabulationBlock(id=f"v{i + 1}", population=int(p)) for i, p in enumerate(pops)]
    return DualGraph(blocks, edges)


def path_graph(pops) -> DualGraph:
    return make_graph(pops, [(i, i + 1) for i in range(len(pops) - 1)])


def grid_graph(rows: int, cols: int, pops=None) -> DualGraph:
    """Rook-adjacent grid; vertex (r, c) has index r * cols + c.

    Edge count is rows * (cols - 1) + cols * (rows - 1) by construction.
    """
    n = rows * cols
    if pops is None:
        pops = [1] * n
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return make_graph(pops, edges)


def random_connected_graph(rng: np.random.Generator, n: int,
                           extra_edge_prob: float = 0.3,
                           max_pop: int = 100) -> DualGraph:
    """Random spanning tree plus a sprinkling of extra edges."""
    pops = [int(p) for p in rng.integers(1, max_pop + 1, size=n)]
    edges = set()
    order = list(rng.permutation(n))
    for i in range(1, n):
        a = order[i]
        b = order[int(rng.integers(i))]
        edges.add((min(a, b), max(a, b)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra_edge_prob / n:
                edges.add((u, v))
    return make_graph(pops, sorted(edges))


def plan_from_labels(graph: DualGraph, labels, k: int) -> DistrictingPlan:
    return DistrictingPlan.from_assignment(graph, labels, k)


def brute_force_articulation(adj: dict[int, tuple[int, ...]]) -> set[int]:
    """Remove each vertex and count components of the rest."""

    def components(vertices: set[int]) -> int:
        remaining = set(vertices)
        count = 0
        while remaining:
            count += 1
            stack = [remaining.pop()]
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v in remaining:
                        remaining.discard(v)
                        stack.append(v)
        return count

    vertices = set(adj)
    base = components(vertices)
    return {v for v in vertices if len(vertices) > 1 and components(vertices - {v}) > base}


@pytest.fixture(scope="session")
def iowa():
    return load_iowa()


@pytest.fixture(scope="session")
def iowa_graph(iowa):
    return iowa.graph
