"""Multilevel coarsening and scheduled uncoarsening.

Coarsening repeatedly draws a uniformly random edge of the current graph
and contracts it when the endpoint populations sum to strictly less than
the population cap. The child vertex inherits the union of its parents'
neighbors and the sum of their populations. Every contraction is logged in
a merge record (parents, their populations, their incident edges, creation
order) so the process is exactly reversible: replaying records in reverse
order reconstructs each finer graph, and a district assignment is lifted by
giving both parents the child's district.

An uncoarsening schedule is an ascending fraction ladder
``uc_0 < uc_1 < ... < uc_q = 1``; the graph is coarsened to
``floor(uc_0 * N)`` vertices and later partially restored at each step.
The degenerate schedule ``1`` means no coarsening at all.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import DistrictingPlan, DualGraph, TabulationBlock

logger = logging.getLogger(__name__)

SCHEDULE_PRESETS: dict[str, tuple[float, ...]] = {
    "UC0": (1.0,),
    "UC1": (0.3, 0.7, 1.0),
    "UC2": (0.25, 0.5, 0.75, 1.0),
    "UC3": (0.3, 0.5, 0.7, 0.9, 1.0),
    "UC4": (0.1, 0.3, 0.5, 0.7, 0.9, 1.0),
    "UC5": (0.3, 0.5, 0.7, 0.9, 0.95, 1.0),
    "UC6": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 0.9, 1.0),
}


@dataclass(frozen=True)
class UncoarseningSchedule:
    """Ascending fractions ending exactly at 1."""

    fractions: tuple[float, ...]

    def __post_init__(self):
        fr = self.fractions
        if not fr:
            raise ValueError("schedule must have at least one fraction")
        if any(not (0.0 < f <= 1.0) for f in fr):
            raise ValueError(f"fractions must lie in (0, 1]: {fr}")
        if any(a >= b for a, b in zip(fr, fr[1:])):
            raise ValueError(f"fractions must be strictly increasing: {fr}")
        if fr[-1] != 1.0:
            raise ValueError(f"last fraction must be exactly 1: {fr}")

    @classmethod
    def parse(cls, text: str) -> "UncoarseningSchedule":
        """Parse a preset name (``UC0`` .. ``UC6``) or a comma-separated
        ascending fraction list such as ``0.3,0.5,0.7,0.9,0.95,1``."""
        name = text.strip().upper()
        if name in SCHEDULE_PRESETS:
            return cls(SCHEDULE_PRESETS[name])
        try:
            fractions = tuple(float(p) for p in text.split(","))
        except ValueError:
            raise ValueError(f"cannot parse schedule {text!r}") from None
        return cls(fractions)

    def as_text(self) -> str:
        return ",".join(format(f, "g") for f in self.fractions)


def target_count(fraction: float, n: int) -> int:
    """floor(fraction * n), guarded against float fuzz just below an integer."""
    return math.floor(fraction * n + 1e-9)


@dataclass(frozen=True)
class MergeRecord:
    """One contraction: enough to delete the child and restore both parents."""

    sequence: int
    child: int
    parent_a: int
    parent_b: int
    pop_a: int
    pop_b: int
    neighbors_a: tuple[int, ...]
    neighbors_b: tuple[int, ...]


class MergeHistory:
    """Coarsening state: replayable merge records plus the current level.

    Vertex identities are stable integer ids: originals keep their input
    index, children get fresh ids above them. A graph emitted at any level
    orders vertices by stable id, so a full uncoarsening reproduces the
    original vertex order exactly.
    """

    def __init__(self, base: DualGraph):
        self.base = base
        self.n_original = base.n
        self.records: list[MergeRecord] = []
        self.applied = 0  # how many records are currently contracted
        self._adj: dict[int, set[int]] = {u: set(nbrs) for u, nbrs in enumerate(base.neighbors)}
        self._pops: dict[int, int] = {u: int(p) for u, p in enumerate(base.populations)}

    @property
    def current_size(self) -> int:
        return len(self._adj)

    def current_ids(self) -> list[int]:
        return sorted(self._adj)

    def _block_for(self, sid: int) -> TabulationBlock:
        if sid < self.n_original:
            return self.base.blocks[sid]
        return TabulationBlock(id=f"merged:{sid - self.n_original}",
                               population=self._pops[sid])

    def current_graph(self) -> DualGraph:
        ids = self.current_ids()
        index = {sid: i for i, sid in enumerate(ids)}
        blocks = [self._block_for(sid) for sid in ids]
        edges = []
        for sid in ids:
            for nb in self._adj[sid]:
                if sid < nb:
                    edges.append((index[sid], index[nb]))
        return DualGraph(blocks, sorted(edges))

    def contract(self, a: int, b: int) -> int:
        """Merge neighbors a and b into a fresh child vertex; returns its id."""
        if b not in self._adj[a]:
            raise ValueError(f"{a} and {b} are not neighbors")
        child = self.n_original + len(self.records)
        rec = MergeRecord(
            sequence=len(self.records),
            child=child,
            parent_a=a,
            parent_b=b,
            pop_a=self._pops[a],
            pop_b=self._pops[b],
            neighbors_a=tuple(sorted(self._adj[a])),
            neighbors_b=tuple(sorted(self._adj[b])),
        )
        self.records.append(rec)
        self.applied += 1
        merged = (self._adj[a] | self._adj[b]) - {a, b}
        for x in self._adj[a]:
            self._adj[x].discard(a)
        for x in self._adj[b]:
            self._adj[x].discard(b)
        del self._adj[a], self._adj[b]
        self._adj[child] = merged
        for x in merged:
            self._adj[x].add(child)
        self._pops[child] = rec.pop_a + rec.pop_b
        del self._pops[a], self._pops[b]
        return child

    def _undo_last(self) -> MergeRecord:
        if self.applied == 0:
            raise ValueError("merge history exhausted")
        rec = self.records[self.applied - 1]
        self.applied -= 1
        child = rec.child
        for x in self._adj[child]:
            self._adj[x].discard(child)
        del self._adj[child], self._pops[child]
        self._adj[rec.parent_a] = set(rec.neighbors_a)
        self._adj[rec.parent_b] = set(rec.neighbors_b)
        for x in rec.neighbors_a:
            self._adj[x].add(rec.parent_a)
        for x in rec.neighbors_b:
            self._adj[x].add(rec.parent_b)
        self._pops[rec.parent_a] = rec.pop_a
        self._pops[rec.parent_b] = rec.pop_b
        return rec

    def uncoarsen(self, target_fraction: float,
                  plans: Sequence[DistrictingPlan] = ()) -> tuple[DualGraph, list[DistrictingPlan]]:
        """Restore vertices (most recent merge first) until the level has
        ``floor(target_fraction * N)`` of them; lift every given plan."""
        target = target_count(target_fraction, self.n_original)
        if target < self.current_size:
            raise ValueError(
                f"target {target} is below the current level size {self.current_size}")
        old_ids = self.current_ids()
        labelings: list[dict[int, int]] = []
        for plan in plans:
            if not plan.is_complete():
                raise ValueError("cannot lift an incomplete plan")
            labelings.append({sid: int(plan.assignment[i]) for i, sid in enumerate(old_ids)})

        while self.current_size < target:
            rec = self._undo_last()
            for labels in labelings:
                d = labels.pop(rec.child)
                labels[rec.parent_a] = d
                labels[rec.parent_b] = d

        graph = self.current_graph()
        new_ids = self.current_ids()
        lifted = []
        for plan, labels in zip(plans, labelings):
            lifted.append(DistrictingPlan.from_assignment(
                graph, [labels[sid] for sid in new_ids], plan.k))
        return graph, lifted


def coarsen(graph: DualGraph, target_fraction: float,
            rng: np.random.Generator | None = None,
            pop_cap: float | None = None) -> tuple[DualGraph, MergeHistory]:
    """Contract uniformly random eligible edges down to
    ``floor(target_fraction * N)`` vertices.

    An edge is eligible while its endpoint populations sum to strictly less
    than ``pop_cap`` (the ideal district population), so no merged block can
    ever dominate a district on its own. Runs out of eligible edges before
    reaching the target: stop early with a warning rather than fail, since
    high-cap inputs can legitimately exhaust. A fraction of 1 is a no-op.
    """
    if not 0.0 < target_fraction <= 1.0:
        raise ValueError(f"target fraction must lie in (0, 1]: {target_fraction}")
    history = MergeHistory(graph)
    target = target_count(target_fraction, graph.n)
    if target >= graph.n:
        return graph, history
    if rng is None or pop_cap is None:
        raise ValueError("rng and pop_cap are required when actually coarsening")
    if target < 1:
        raise ValueError(f"target fraction {target_fraction} leaves no vertices")

    candidates: list[tuple[int, int]] = [tuple(e) for e in graph.edges]
    in_list: set[tuple[int, int]] = set(candidates)

    while history.current_size > target and candidates:
        idx = int(rng.integers(len(candidates)))
        a, b = candidates[idx]
        alive = a in history._adj and b in history._adj and b in history._adj[a]
        if not alive or history._pops[a] + history._pops[b] >= pop_cap:
            # stale or (permanently, since populations only grow) ineligible
            last = candidates.pop()
            in_list.discard((a, b))
            if idx < len(candidates):
                candidates[idx] = last
            continue
        child = history.contract(a, b)
        for x in history._adj[child]:
            key = (child, x) if child < x else (x, child)
            if key not in in_list:
                in_list.add(key)
                candidates.append(key)

    if history.current_size > target:
        logger.warning(
            "coarsening stopped early at %d vertices (target %d): no edge pair "
            "fits under the population cap %.1f",
            history.current_size, target, pop_cap)
    return history.current_graph(), history


def uncoarsen_to(history: MergeHistory, plan: DistrictingPlan | None,
                 target_fraction: float) -> tuple[DualGraph, DistrictingPlan | None]:
    """Single-plan convenience over :meth:`MergeHistory.uncoarsen`."""
    plans = [plan] if plan is not None else []
    graph, lifted = history.uncoarsen(target_fraction, plans)
    return graph, (lifted[0] if lifted else None)
