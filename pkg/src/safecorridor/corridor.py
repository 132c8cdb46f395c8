"""Safe corridors: plan a voxel path, grow seeds along it, audit the result."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import geometry
from .expansion import LEGACY, PROPOSED, ConvexGridState, HeuristicFlags, expand_seed
from .geometry import Polyhedron
from .voxel_grid import VoxelGrid

Index = Tuple[int, int, int]

# lexicographic order of the six face neighbours; breaks ties between shortest paths
NEIGHBOURS = ((-1, 0, 0), (0, -1, 0), (0, 0, -1), (0, 0, 1), (0, 1, 0), (1, 0, 0))

AUDIT_MARGIN = 1e-9


class PlanningError(RuntimeError):
    """Start or goal unusable, or no path between them."""


class CorridorError(RuntimeError):
    """Corridor could not be assembled with overlapping consecutive entries."""

    def __init__(self, message, path_index=None, entries=None):
        super().__init__(message)
        self.path_index = path_index
        self.entries = entries or []


@dataclass
class CorridorEntry:
    state: ConvexGridState
    polyhedron: Polyhedron
    path_index: int

    @property
    def seed(self) -> Index:
        return self.state.seed


@dataclass
class SafeCorridor:
    entries: List[CorridorEntry]
    path: List[Index]
    reseeds: List[Tuple[int, str]] = field(default_factory=list)
    gaps: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def polyhedra(self) -> List[Polyhedron]:
        return [e.polyhedron for e in self.entries]

    @property
    def states(self) -> List[ConvexGridState]:
        return [e.state for e in self.entries]


@dataclass
class SafetyReport:
    safe: bool
    violations: List[Tuple[int, Index]]


def _endpoint(grid: VoxelGrid, p, what: str) -> Index:
    idx = grid.point_to_index(p)
    if not grid.in_bounds(idx):
        raise PlanningError(f"{what} {tuple(p)} lies outside the grid")
    if grid.occupancy[idx]:
        raise PlanningError(f"{what} voxel {idx} is occupied")
    return idx


def bfs_distance(free: np.ndarray, source: Index, stop: Optional[Index] = None) -> np.ndarray:
    """Six-connected hop distance from ``source`` over ``free`` voxels (-1 = unreached)."""
    dist = np.full(free.shape, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.zeros(free.shape, dtype=bool)
    frontier[source] = True
    step = 0
    while frontier.any():
        if stop is not None and dist[stop] >= 0:
            break
        step += 1
        grown = np.zeros_like(frontier)
        grown[1:] |= frontier[:-1]
        grown[:-1] |= frontier[1:]
        grown[:, 1:] |= frontier[:, :-1]
        grown[:, :-1] |= frontier[:, 1:]
        grown[:, :, 1:] |= frontier[:, :, :-1]
        grown[:, :, :-1] |= frontier[:, :, 1:]
        frontier = grown & free & (dist < 0)
        dist[frontier] = step
    return dist


def plan_path(grid: VoxelGrid, start, goal) -> List[Index]:
    """Shortest six-connected voxel path between two metric points, endpoints included."""
    s = _endpoint(grid, start, "start")
    g = _endpoint(grid, goal, "goal")
    dist = bfs_distance(~grid.occupancy, g, stop=s)
    if dist[s] < 0:
        raise PlanningError(f"no path from {s} to {g}")
    path = [s]
    cur = s
    while cur != g:
        d = dist[cur]
        for off in NEIGHBOURS:
            nxt = tuple(c + o for c, o in zip(cur, off))
            if grid.in_bounds(nxt) and dist[nxt] == d - 1:
                cur = nxt
                break
        path.append(cur)
    return path


def _joins(prev: CorridorEntry, state: ConvexGridState, poly: Polyhedron) -> bool:
    if prev.state.voxel_ids.isdisjoint(state.voxel_ids):
        return False
    return geometry.polyhedra_intersect_feasibility(prev.polyhedron, poly, check_inputs=False)


def build_corridor(grid: VoxelGrid, path, max_expansions: int = 36,
                   flags: HeuristicFlags = PROPOSED, strict: bool = True) -> SafeCorridor:
    """Grow seeds along ``path`` until every path voxel centre lies in some polyhedron.

    Each seed is the first path voxel whose centre no polyhedron contains. A
    new entry must share a voxel with its predecessor and overlap it in
    volume. When it does not, two fallbacks are tried in order: seeding at the
    previous path voxel, then regrowing the same seed under the legacy rules.
    Fallbacks are recorded in ``reseeds`` as (path index, kind). If none of
    them joins, ``strict`` raises CorridorError; otherwise the plain entry is
    kept and its path index is recorded in ``gaps``.
    """
    path = [tuple(int(c) for c in p) for p in path]
    if not path:
        raise ValueError("empty path")
    centers = np.array([grid.index_to_center(p) for p in path])
    covered = np.zeros(len(path), dtype=bool)
    entries: List[CorridorEntry] = []
    reseeds: List[Tuple[int, str]] = []
    gaps: List[int] = []
    while not covered.all():
        j = int(np.argmin(covered))
        tries = [(j, flags, None)]
        if entries:
            if j > 0 and path[j - 1] != entries[-1].seed:
                tries.append((j - 1, flags, "previous_voxel"))
            if flags != LEGACY:
                tries.append((j, LEGACY, "legacy_rules"))
        first = None
        for k, f, kind in tries:
            state, poly = expand_seed(grid, path[k], max_expansions, f)
            inside = geometry.contains_points(poly, centers, tol=geometry.TOL)
            if first is None:
                first = (k, state, poly, inside)
            if not (inside & ~covered).any():
                continue
            if entries and not _joins(entries[-1], state, poly):
                continue
            break
        else:
            if strict:
                raise CorridorError(
                    f"no entry seeded near path[{j}] overlaps its predecessor", j, entries
                )
            k, state, poly, inside = first
            kind = None
            gaps.append(j)
        if kind is not None:
            reseeds.append((j, kind))
        entries.append(CorridorEntry(state, poly, k))
        covered |= inside
    return SafeCorridor(entries, path, reseeds, gaps)


def occupied_near(grid: VoxelGrid, poly: Polyhedron) -> np.ndarray:
    """Occupied voxel indices whose cells overlap the polyhedron's bounding box."""
    lo, hi = geometry.bounding_box(poly)
    vs = grid.voxel_size
    origin = np.asarray(grid.origin)
    i0 = np.maximum(np.floor((lo - origin) / vs).astype(int) - 1, 0)
    i1 = np.minimum(np.ceil((hi - origin) / vs).astype(int) + 1, grid.dims)
    sub = grid.occupancy[i0[0]:i1[0], i0[1]:i1[1], i0[2]:i1[2]]
    return np.argwhere(sub) + i0


def audit_polyhedron(grid: VoxelGrid, poly: Polyhedron, margin: float = AUDIT_MARGIN) -> List[Index]:
    """Occupied voxels whose open cell the polyhedron enters."""
    occ = occupied_near(grid, poly)
    if len(occ) == 0:
        return []
    vs = grid.voxel_size
    lo = np.asarray(grid.origin) + occ * vs + margin
    hi = lo + vs - 2 * margin
    n = poly.normals
    # min of n.x over each box; a box entirely beyond one plane cannot intersect
    mins = np.einsum("bk,hk->bh", lo, np.maximum(n, 0)) + np.einsum("bk,hk->bh", hi, np.minimum(n, 0))
    maybe = ~np.any(mins > poly.offsets + 1e-12, axis=1)
    hits = []
    for idx, blo, bhi in zip(occ[maybe], lo[maybe], hi[maybe]):
        if geometry.box_intersects(poly, blo, bhi):
            hits.append(tuple(int(c) for c in idx))
    return hits


def audit_safety(corridor: SafeCorridor, grid: VoxelGrid) -> SafetyReport:
    violations = []
    for i, entry in enumerate(corridor.entries):
        violations.extend((i, v) for v in audit_polyhedron(grid, entry.polyhedron))
    return SafetyReport(not violations, violations)


def consecutive_overlaps(corridor: SafeCorridor) -> List[bool]:
    states = corridor.states
    return [not a.voxel_ids.isdisjoint(b.voxel_ids) for a, b in zip(states, states[1:])]
