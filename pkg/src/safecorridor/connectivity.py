"""Connectivity graph over polyhedra from shared convex-grid voxels."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import geometry
from .expansion import ConvexGridState, extract_polyhedron
from .geometry import Polyhedron


class GridMismatchError(ValueError):
    """States were grown on different voxel grids."""


def _same_grid(a: ConvexGridState, b: ConvexGridState) -> bool:
    ga, gb = a.grid, b.grid
    return ga is gb or (
        ga.dims == gb.dims and ga.voxel_size == gb.voxel_size and ga.origin == gb.origin
    )


def grids_overlap(a: ConvexGridState, b: ConvexGridState) -> bool:
    """True iff the two convex grids share a voxel.

    Bounding boxes are compared first; overlapping boxes fall through to
    hash-set probes of the smaller voxel set against the larger one.
    """
    if not _same_grid(a, b):
        raise GridMismatchError("convex grids belong to different voxel grids")
    alo, ahi, blo, bhi = a.lo, a.hi, b.lo, b.hi
    if (alo[0] >= bhi[0] or blo[0] >= ahi[0] or alo[1] >= bhi[1] or blo[1] >= ahi[1]
            or alo[2] >= bhi[2] or blo[2] >= ahi[2]):
        return False
    sa, sb = a.voxel_ids, b.voxel_ids
    if len(sa) > len(sb):
        sa, sb = sb, sa
    return not sa.isdisjoint(sb)


@dataclass
class ConnectivityGraph:
    nodes: List[int]
    edges: List[Tuple[int, int]]
    pair_checks: int = 0
    adjacency: Dict[int, List[int]] = field(default_factory=dict)

    def __post_init__(self):
        self.edges = sorted((min(i, j), max(i, j)) for i, j in self.edges)
        adj: Dict[int, List[int]] = {n: [] for n in self.nodes}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        self.adjacency = {n: sorted(v) for n, v in adj.items()}

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "ConnectivityGraph":
        return cls(list(data["nodes"]), [tuple(e) for e in data["edges"]])


def build_graph(states: Sequence[ConvexGridState]) -> ConnectivityGraph:
    """Check every unordered pair once: k(k-1)/2 calls for k states."""
    edges = []
    checks = 0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            checks += 1
            if grids_overlap(states[i], states[j]):
                edges.append((i, j))
    return ConnectivityGraph(list(range(len(states))), edges, checks)


@dataclass
class ValidationReport:
    false_negatives: List[Tuple[int, int]]
    extra_edges: List[Tuple[int, int]]
    pairs: int
    mean_overlap_us: float
    mean_feasibility_us: float

    def to_json(self) -> dict:
        return {
            "false_negatives": [list(p) for p in self.false_negatives],
            "extra_edges": [list(p) for p in self.extra_edges],
            "pairs": self.pairs,
        }


def validate_graph(states: Sequence[ConvexGridState], graph: ConnectivityGraph,
                   polyhedra: Optional[Sequence[Polyhedron]] = None) -> ValidationReport:
    """Compare the voxel-sharing edges with exact polyhedron intersection.

    ``false_negatives`` lists pairs whose polyhedra overlap but have no edge
    (must stay empty); ``extra_edges`` lists edges whose polyhedra do not
    overlap (allowed, the voxel test is conservative).
    """
    if polyhedra is None:
        polyhedra = [extract_polyhedron(s) for s in states]
    for i, p in enumerate(polyhedra):
        if not geometry.is_nonempty(p):
            raise geometry.GeometryError(f"polyhedron {i} is empty")
    edge_set = set(graph.edges)
    false_neg, extra = [], []
    t_overlap = t_feas = 0.0
    pairs = 0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            pairs += 1
            t0 = time.perf_counter()
            grids_overlap(states[i], states[j])
            t1 = time.perf_counter()
            hit = geometry.polyhedra_intersect_feasibility(polyhedra[i], polyhedra[j], check_inputs=False)
            t2 = time.perf_counter()
            t_overlap += t1 - t0
            t_feas += t2 - t1
            if hit and (i, j) not in edge_set:
                false_neg.append((i, j))
            elif not hit and (i, j) in edge_set:
                extra.append((i, j))
    scale = 1e6 / pairs if pairs else 0.0
    return ValidationReport(false_neg, extra, pairs, t_overlap * scale, t_feas * scale)
