"""Seed expansion into a convex grid with an inscribed polyhedron.

Model
-----
All bookkeeping happens in lattice units (one voxel = 1, voxel ``i`` spans
``[i, i + 1]``). A state is an axis-aligned box of voxel indices
``lo <= v < hi`` cut by at most one *bevel* plane per box edge. A bevel on the
edge between directions ``d1`` and ``d2`` is the integer halfspace

    c1 * u1 + c2 * u2 <= gamma,     c1, c2 >= 1,

where ``u_k`` is the coordinate measured outward along ``d_k``. The inscribed
polyhedron is the box intersected with the bevels, and the convex grid is the
set of voxels whose open cell meets the open polyhedron. The polyhedron is
therefore inscribed in the voxel union by construction, and safety reduces to
"every member voxel is free".

Expanding a border moves one box face outward by one layer. Occupied voxels in
the new layer are cut away by trimming whole rows from the layer's sides; each
trimmed side becomes (or steepens) the bevel on the edge between the expanded
border and that side. The bevel passes through the trimmed row boundary and
is kept just shallow enough that no current member voxel is lost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import geometry
from .geometry import Polyhedron
from .voxel_grid import VoxelGrid

Index = Tuple[int, int, int]
Edge = Tuple[int, int]

DIRECTION_NAMES = ("+x", "-x", "+y", "-y", "+z", "-z")
DIRS = ((0, 1), (0, -1), (1, 1), (1, -1), (2, 1), (2, -1))
CYCLE = (0, 1, 2, 3, 4, 5)
EDGES: Tuple[Edge, ...] = tuple(
    (d1, d2) for d1 in range(6) for d2 in range(6) if DIRS[d1][0] < DIRS[d2][0]
)

ACCEPTED, REJECTED = "accepted", "rejected"
NONE, BLOCKED, OUT_OF_BOUNDS = "none", "blocked_legacy", "out_of_bounds"
VOLUME, CORNER_1, CORNER_2 = "volume_heuristic", "corner_check_1", "corner_check_2"
UNINITIALIZED, DIRECTION_FIXED, DIRECTION_UNKNOWN = (
    "uninitialized", "direction_fixed", "direction_unknown",
)


class SeedError(ValueError):
    """Seed voxel is out of range or occupied."""


def direction_index(name) -> int:
    if isinstance(name, int):
        return name
    return DIRECTION_NAMES.index(name)


def edge_of(d1: int, d2: int) -> Edge:
    if DIRS[d1][0] == DIRS[d2][0]:
        raise ValueError("corner directions must lie on different axes")
    return (d1, d2) if DIRS[d1][0] < DIRS[d2][0] else (d2, d1)


def _inner(idx, sign):
    """Outward coordinate of the inner face of voxel ``idx`` along a direction."""
    return idx if sign > 0 else -idx - 1


@dataclass(frozen=True)
class HeuristicFlags:
    volume_heuristic: bool = True
    corner_checks: bool = True


LEGACY = HeuristicFlags(False, False)
PROPOSED = HeuristicFlags(True, True)


@dataclass(frozen=True)
class Bevel:
    """``coef[0] * u(edge[0]) + coef[1] * u(edge[1]) <= gamma`` in lattice units."""

    coef: Tuple[int, int]
    gamma: int

    def slope(self, edge: Edge, advance_dir: int) -> Fraction:
        """Trim along the other direction per layer advanced along ``advance_dir``."""
        i = edge.index(advance_dir)
        return Fraction(self.coef[i], self.coef[1 - i])


@dataclass
class Border:
    direction: int
    depth: int
    extent: Tuple[int, int, int, int]
    frozen: bool

    @property
    def name(self) -> str:
        return DIRECTION_NAMES[self.direction]


@dataclass
class Corner:
    plane: Tuple[str, str]
    steps: List[Tuple[int, int]]
    slope_state: str
    slope: Fraction


@dataclass
class ExpansionOutcome:
    status: str
    reason: str = NONE
    new_border: Optional[Border] = None
    new_corners: Tuple[Edge, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.status == ACCEPTED


@dataclass
class ConvexGridState:
    grid: VoxelGrid
    seed: Index
    lo: np.ndarray
    hi: np.ndarray
    bevels: Dict[Edge, Bevel] = field(default_factory=dict)
    exclusions: Dict[Edge, List[Tuple[int, int]]] = field(default_factory=dict)
    corner_states: Dict[Edge, str] = field(default_factory=dict)
    frozen: List[bool] = field(default_factory=lambda: [False] * 6)
    expansions_done: int = 0
    flags: HeuristicFlags = PROPOSED
    _mask: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _ids: Optional[frozenset] = field(default=None, repr=False, compare=False)

    def clone(self) -> "ConvexGridState":
        return ConvexGridState(
            self.grid, self.seed, self.lo.copy(), self.hi.copy(), dict(self.bevels),
            {e: list(p) for e, p in self.exclusions.items()}, dict(self.corner_states),
            list(self.frozen), self.expansions_done, self.flags, self._mask, self._ids,
        )

    def _invalidate(self):
        self._mask = None
        self._ids = None

    # -- geometry of the box ------------------------------------------------
    def face(self, d: int) -> int:
        """Outward lattice coordinate of the box face in direction ``d``."""
        a, s = DIRS[d]
        return int(self.hi[a]) if s > 0 else -int(self.lo[a])

    def set_face(self, d: int, value: int) -> None:
        a, s = DIRS[d]
        if s > 0:
            self.hi[a] = value
        else:
            self.lo[a] = -value
        self._invalidate()

    @property
    def mask(self) -> np.ndarray:
        """Membership over the box ``lo:hi``."""
        if self._mask is None:
            ranges = [np.arange(self.lo[i], self.hi[i]) for i in range(3)]
            self._mask = member_mask(self.bevels, ranges)
        return self._mask

    def voxel_indices(self) -> np.ndarray:
        return np.argwhere(self.mask) + self.lo

    @property
    def voxel_ids(self) -> frozenset:
        """Linear ids ``i + nx * (j + ny * k)`` of the member voxels."""
        if self._ids is None:
            nx, ny, _ = self.grid.dims
            v = self.voxel_indices()
            self._ids = frozenset((v[:, 0] + nx * (v[:, 1] + ny * v[:, 2])).tolist())
        return self._ids

    @property
    def n_voxels(self) -> int:
        return int(self.mask.sum())

    def contains_voxel(self, idx) -> bool:
        idx = np.asarray(idx)
        if np.any(idx < self.lo) or np.any(idx >= self.hi):
            return False
        return bool(self.mask[tuple(idx - self.lo)])

    def layer_mask(self, d: int, offset: int = 0) -> np.ndarray:
        """Membership of the outermost layer in direction ``d`` (2D, remaining axes in order)."""
        a, s = DIRS[d]
        k = (self.hi[a] - 1 if s > 0 else self.lo[a]) - self.lo[a]
        return np.take(self.mask, k, axis=a)

    # -- record views ----------------------------------------------------------
    @property
    def borders(self) -> List[Border]:
        out = []
        for d in range(6):
            a, s = DIRS[d]
            p, q = [i for i in range(3) if i != a]
            depth = (self.hi[a] - 1 - self.seed[a]) if s > 0 else (self.seed[a] - self.lo[a])
            extent = (int(self.lo[p]), int(self.hi[p]), int(self.lo[q]), int(self.hi[q]))
            out.append(Border(d, int(depth), extent, self.frozen[d]))
        return out

    @property
    def corners(self) -> Dict[Edge, Corner]:
        out = {}
        for edge in EDGES:
            name = (DIRECTION_NAMES[edge[0]], DIRECTION_NAMES[edge[1]])
            bv = self.bevels.get(edge)
            if bv is None:
                out[edge] = Corner(name, [], UNINITIALIZED, Fraction(0))
            else:
                out[edge] = Corner(
                    name, self._steps(edge, bv),
                    self.corner_states.get(edge, DIRECTION_UNKNOWN), bv.slope(edge, edge[0]),
                )
        return out

    def corner_slope(self, d: int, side: int) -> Fraction:
        edge = edge_of(d, side)
        bv = self.bevels.get(edge)
        return Fraction(0) if bv is None else bv.slope(edge, d)

    def _steps(self, edge: Edge, bv: Bevel) -> List[Tuple[int, int]]:
        # stair of rows cut from side edge[1], walking outward along edge[0]
        d1, d2 = edge
        a1, s1 = DIRS[d1]
        top = self.face(d2) - 1
        lo_u = _inner(self.lo[a1] if s1 > 0 else self.hi[a1] - 1, s1)
        trims = []
        for u in range(int(lo_u), self.face(d1)):
            # highest row w with c1*u + c2*w < gamma
            w_max = -((bv.coef[0] * u - bv.gamma) // bv.coef[1]) - 1
            trims.append(max(0, top - min(top, w_max)))
        steps: List[Tuple[int, int]] = []
        prev, run = 0, 0
        for t in trims:
            if t == prev:
                run += 1
                continue
            steps.append((run, t - prev))
            prev, run = t, 1
        return steps

    @property
    def voxels(self) -> frozenset:
        return frozenset(map(tuple, self.voxel_indices().tolist()))


# -- membership -------------------------------------------------------------------

def _axis_view(values, axis):
    shape = [1, 1, 1]
    shape[axis] = len(values)
    return np.asarray(values).reshape(shape)


def member_mask(bevels: Dict[Edge, Bevel], ranges) -> np.ndarray:
    """Voxels (over the index ranges) whose open cell meets the open polyhedron.

    Each bevel is tested at the voxel corner that minimises it. Where bevels
    pull a voxel towards opposite corners along a shared axis, that test is
    only necessary, so those voxels are settled by exact elimination.
    """
    shape = tuple(len(r) for r in ranges)
    m = np.ones(shape, dtype=bool)
    if not bevels:
        return m
    pos = [np.zeros(shape, dtype=bool) for _ in range(3)]
    neg = [np.zeros(shape, dtype=bool) for _ in range(3)]
    signs = [set(), set(), set()]
    for (d1, d2), bv in bevels.items():
        (a1, s1), (a2, s2) = DIRS[d1], DIRS[d2]
        u = _axis_view(_inner(ranges[a1], s1), a1)
        w = _axis_view(_inner(ranges[a2], s2), a2)
        val = bv.coef[0] * u + bv.coef[1] * w
        m &= np.broadcast_to(val < bv.gamma, shape)
        cut = np.broadcast_to(val + bv.coef[0] + bv.coef[1] > bv.gamma, shape)
        for a, s in ((a1, s1), (a2, s2)):
            signs[a].add(s)
            (pos if s > 0 else neg)[a] |= cut
    if not any(len(s) == 2 for s in signs):
        return m
    conflict = np.zeros(shape, dtype=bool)
    for a in range(3):
        if len(signs[a]) == 2:
            conflict |= pos[a] & neg[a]
    conflict &= m
    for cell in np.argwhere(conflict):
        idx = [int(ranges[i][cell[i]]) for i in range(3)]
        if not _open_cell_meets(idx, bevels):
            m[tuple(cell)] = False
    return m


def _open_cell_meets(idx, bevels: Dict[Edge, Bevel]) -> bool:
    """Exact test that the open voxel ``idx`` meets the open polyhedron.

    Fourier-Motzkin elimination over strict integer inequalities ``a.x < b``;
    exact, and cheap for the handful of constraints involved.
    """
    rows = []
    for a in range(3):
        lo = [0, 0, 0]
        lo[a] = -1
        rows.append((tuple(lo), -idx[a]))
        hi = [0, 0, 0]
        hi[a] = 1
        rows.append((tuple(hi), idx[a] + 1))
    for (d1, d2), bv in bevels.items():
        (a1, s1), (a2, s2) = DIRS[d1], DIRS[d2]
        if bv.coef[0] * (_inner(idx[a1], s1) + 1) + bv.coef[1] * (_inner(idx[a2], s2) + 1) <= bv.gamma:
            continue
        c = [0, 0, 0]
        c[a1] = bv.coef[0] * s1
        c[a2] = bv.coef[1] * s2
        rows.append((tuple(c), bv.gamma))
    for a in range(3):
        pos = [r for r in rows if r[0][a] > 0]
        neg = [r for r in rows if r[0][a] < 0]
        out = {r for r in rows if r[0][a] == 0}
        for cp, bp in pos:
            for cn, bn in neg:
                kp, kn = -cn[a], cp[a]
                out.add((tuple(kp * x + kn * y for x, y in zip(cp, cn)), kp * bp + kn * bn))
        rows = list(out)
    return all(b > 0 for _, b in rows)


def _seed_inside(state: ConvexGridState) -> bool:
    """Seed voxel centre strictly inside the polyhedron (doubled integers, exact)."""
    for (d1, d2), bv in state.bevels.items():
        (a1, s1), (a2, s2) = DIRS[d1], DIRS[d2]
        u = 2 * _inner(state.seed[a1], s1) + 1
        w = 2 * _inner(state.seed[a2], s2) + 1
        if bv.coef[0] * u + bv.coef[1] * w >= 2 * bv.gamma:
            return False
    return True


# -- construction -------------------------------------------------------------------

def init_seed(grid: VoxelGrid, seed, flags: HeuristicFlags = PROPOSED) -> ConvexGridState:
    seed = tuple(int(i) for i in seed)
    if len(seed) != 3 or not grid.in_bounds(seed):
        raise SeedError(f"seed {seed} outside grid {grid.dims}")
    if grid.occupancy[seed]:
        raise SeedError(f"seed {seed} is occupied")
    lo = np.array(seed, dtype=np.int64)
    return ConvexGridState(grid, seed, lo, lo + 1, flags=flags)


def volume_heuristic(candidate_count: int, border_count: int) -> bool:
    """Accept only if the new border keeps more than half of the expanded border."""
    return 2 * candidate_count > border_count


def _max_free_rectangle(A: np.ndarray, O: np.ndarray, anchor):
    """Rows/cols ``(r0, r1, c0, c1)`` of the rectangle holding the anchor and no
    occupied cell that keeps the most cells of ``A`` (ties: larger area)."""
    H, W = A.shape
    ar, ac = anchor
    occ = [sum(1 << c for c in np.flatnonzero(row).tolist()) for row in O]
    S = np.zeros((H + 1, W + 1), dtype=np.int64)
    S[1:, 1:] = A.astype(np.int64).cumsum(0).cumsum(1)
    S = S.tolist()
    full = (1 << W) - 1
    abit = 1 << ac
    best, best_key = None, None
    top = 0
    for r0 in range(ar, -1, -1):
        top |= occ[r0]
        if top & abit:
            break
        blk = top
        for r1 in range(ar, H):
            if r1 > ar:
                blk |= occ[r1]
            if blk & abit:
                break
            below = blk & (abit - 1)
            c0 = below.bit_length()
            above = (blk & full) >> (ac + 1)
            c1 = W - 1 if above == 0 else ac + (above & -above).bit_length() - 1
            count = S[r1 + 1][c1 + 1] - S[r0][c1 + 1] - S[r1 + 1][c0] + S[r0][c0]
            key = (count, (r1 - r0 + 1) * (c1 - c0 + 1))
            if best_key is None or key > best_key:
                best, best_key = (r0, r1, c0, c1), key
    return best


@dataclass
class _Candidate:
    state: ConvexGridState
    new_edges: Tuple[Edge, ...]
    trims: Dict[Edge, Tuple[int, int]]
    border_count: int
    candidate_count: int


def _solve_bevel(state: ConvexGridState, d: int, side: int, e: Tuple[int, int],
                 exclusions: List[Tuple[int, int]]) -> Optional[Bevel]:
    """Bevel on edge (d, side) through the row boundary ``e = (U, R)``.

    In the frame (u along d, w along side) the bevel reads
    ``w <= R + slope * (U - u)``. Every member voxel stays (strict), every
    recorded exclusion point stays out (non-strict); among those lines the
    shallowest one through the outer corner of some member step is chosen.
    """
    U, R = e
    a1, s1 = DIRS[d]
    a2, s2 = DIRS[side]
    vox = state.voxel_indices()
    u_in = _inner(vox[:, a1], s1)
    w_in = _inner(vox[:, a2], s2)
    lower = None
    for u in np.unique(u_in).tolist():
        w = int(w_in[u_in == u].max())
        if u >= U:
            if w >= R:
                return None
            continue
        ratio = Fraction(w + 1 - R, U - u)
        lower = ratio if lower is None or ratio > lower else lower
    upper = None
    for (u, w) in exclusions:
        if u < U:
            ratio = Fraction(w - R, U - u)
            upper = ratio if upper is None or ratio < upper else upper
        elif u == U:
            if w < R:
                return None
        else:
            ratio = Fraction(R - w, u - U)
            lower = ratio if lower is None or ratio > lower else lower
    if lower is None or lower <= 0:
        return None
    if upper is not None and lower > upper:
        return None
    coef_d, coef_side = lower.numerator, lower.denominator
    gamma = coef_d * U + coef_side * R
    edge = edge_of(d, side)
    coef = (coef_d, coef_side) if edge[0] == d else (coef_side, coef_d)
    return Bevel(coef, gamma)


def _to_frame(edge: Edge, d: int, pt):
    return pt if edge[0] == d else (pt[1], pt[0])


def _legacy_candidate(state: ConvexGridState, d: int):
    """New border candidate under the geometric (legacy) rules.

    Returns ``(candidate, None)`` or ``(None, reason)``.
    """
    grid = state.grid
    a, s = DIRS[d]
    layer_idx = int(state.hi[a]) if s > 0 else int(state.lo[a]) - 1
    if not 0 <= layer_idx < grid.dims[a]:
        return None, OUT_OF_BOUNDS
    p, q = [i for i in range(3) if i != a]
    U = state.face(d)
    ranges = [np.arange(state.lo[i], state.hi[i]) for i in range(3)]
    ranges[a] = np.array([layer_idx])
    A = np.take(member_mask(state.bevels, ranges), 0, axis=a)
    if not A.any():
        return None, BLOCKED
    sl = [slice(state.lo[i], state.hi[i]) for i in range(3)]
    sl[a] = layer_idx
    O = grid.occupancy[tuple(sl)] & A
    border_count = int(state.layer_mask(d).sum())

    cand = state.clone()
    cand.set_face(d, U + 1)
    new_bevels = dict(state.bevels)
    trims: Dict[Edge, Tuple[int, int]] = {}

    if O.any():
        rows, cols = np.nonzero(A)
        r_lo, r_hi, c_lo, c_hi = rows.min(), rows.max(), cols.min(), cols.max()
        Ab = A[r_lo:r_hi + 1, c_lo:c_hi + 1]
        Ob = O[r_lo:r_hi + 1, c_lo:c_hi + 1]
        sr = int(np.clip(state.seed[p] - state.lo[p] - r_lo, 0, Ab.shape[0] - 1))
        sc = int(np.clip(state.seed[q] - state.lo[q] - c_lo, 0, Ab.shape[1] - 1))
        if not Ab[sr, sc]:
            cells = np.argwhere(Ab)
            dist = np.abs(cells - [sr, sc]).sum(axis=1)
            sr, sc = cells[np.argmin(dist)]
        if Ob[sr, sc]:
            return None, BLOCKED
        rect = _max_free_rectangle(Ab, Ob, (int(sr), int(sc)))
        if rect is None:
            return None, BLOCKED
        r0, r1, c0, c1 = rect
        H, W = Ab.shape
        # side direction -> (needed, bound) with bound the first excluded outward row
        sides = {}
        off_p = state.lo[p] + r_lo
        off_q = state.lo[q] + c_lo
        if r1 < H - 1:
            sides[2 * p] = int(off_p + r1 + 1)
        if r0 > 0:
            sides[2 * p + 1] = -int(off_p + r0)
        if c1 < W - 1:
            sides[2 * q] = int(off_q + c1 + 1)
        if c0 > 0:
            sides[2 * q + 1] = -int(off_q + c0)

        # drop trims whose removal lets no occupied voxel back in
        def kept(active):
            keep = Ab.copy()
            rr = np.arange(H)[:, None] + off_p
            cc = np.arange(W)[None, :] + off_q
            for sd, bound in active.items():
                ax, sg = DIRS[sd]
                coord = rr if ax == p else cc
                keep &= _inner(coord, sg) < bound
            return keep

        for sd in sorted(sides):
            trial = {k: v for k, v in sides.items() if k != sd}
            if not (kept(trial) & Ob).any():
                sides = trial

        for sd, bound in sorted(sides.items()):
            edge = edge_of(d, sd)
            excl = [_to_frame(edge, d, pt) for pt in state.exclusions.get(edge, [])]
            trims[edge] = (U, bound)
            excl.append((U, bound))
            bv = _solve_bevel(state, d, sd, (U, bound), excl)
            if bv is None:
                return None, BLOCKED
            new_bevels[edge] = bv
            cand.exclusions[edge] = cand.exclusions.get(edge, []) + [_to_frame(edge, d, (U, bound))]

        cand.bevels = new_bevels
        cand._invalidate()
        # steepened bevels may uncover voxels they used to hide; pin occupied ones
        for _ in range(8):
            bad = _occupied_members(cand)
            if len(bad) == 0:
                break
            progressed = False
            for v in bad:
                for edge in trims:
                    old = state.bevels.get(edge)
                    if old is None or member_mask({edge: old}, [np.array([c]) for c in v])[0, 0, 0]:
                        continue
                    sd = edge[1] if edge[0] == d else edge[0]
                    pt = (_inner(v[a], s), _inner(v[DIRS[sd][0]], DIRS[sd][1]))
                    cand.exclusions[edge].append(_to_frame(edge, d, pt))
                    progressed = True
            if not progressed:
                return None, BLOCKED
            for edge, e in trims.items():
                sd = edge[1] if edge[0] == d else edge[0]
                excl = [_to_frame(edge, d, pt) for pt in cand.exclusions[edge]]
                bv = _solve_bevel(state, d, sd, e, excl)
                if bv is None:
                    return None, BLOCKED
                new_bevels[edge] = bv
            cand.bevels = dict(new_bevels)
            cand._invalidate()
        else:
            return None, BLOCKED
        if len(_occupied_members(cand)):
            return None, BLOCKED
        if not _seed_inside(cand):
            return None, BLOCKED
    else:
        cand._invalidate()

    new_layer = cand.layer_mask(d)
    if not new_layer.any():
        return None, BLOCKED
    new_edges = tuple(e for e in trims if e not in state.bevels)
    return _Candidate(cand, new_edges, trims, border_count, int(new_layer.sum())), None


def _occupied_members(state: ConvexGridState) -> np.ndarray:
    sl = tuple(slice(state.lo[i], state.hi[i]) for i in range(3))
    hit = state.mask & state.grid.occupancy[sl]
    return np.argwhere(hit) + state.lo


def _classify(state: ConvexGridState, edge: Edge, d: int) -> str:
    side = edge[1] if edge[0] == d else edge[0]
    if state.frozen[side]:
        return DIRECTION_FIXED
    if any(side in e for e in state.bevels):
        return DIRECTION_FIXED
    return DIRECTION_UNKNOWN


def _probe_free(grid: VoxelGrid, cells) -> bool:
    """All probe voxels in range and free (the grid boundary counts as occupied)."""
    for c in cells:
        if not grid.in_bounds(c) or grid.occupancy[tuple(c)]:
            return False
    return True


def _outer_row(state: ConvexGridState, d: int, side: int, layer_from_face: int) -> np.ndarray:
    """Member voxels of a layer (0 = outermost along d) that lie in its outermost row along ``side``."""
    a, s = DIRS[d]
    b, sb = DIRS[side]
    vox = state.voxel_indices()
    k = (state.hi[a] - 1 - layer_from_face) if s > 0 else (state.lo[a] + layer_from_face)
    layer = vox[vox[:, a] == k]
    if len(layer) == 0:
        return layer
    w = _inner(layer[:, b], sb)
    return layer[w == w.max()]


def corner_first_check(state: ConvexGridState, candidate: ConvexGridState, edge: Edge,
                       d: int, case: str) -> bool:
    """Probe one layer past the voxels next to the new corner; False means invalid."""
    a, s = DIRS[d]
    side = edge[1] if edge[0] == d else edge[0]
    step = np.zeros(3, dtype=np.int64)
    step[a] = s
    probes = _outer_row(candidate, d, side, 0) + step
    if not _probe_free(state.grid, probes):
        return True
    if case == DIRECTION_FIXED:
        return False
    probes = _outer_row(state, d, side, 0) + step
    return not _probe_free(state.grid, probes)


def _lookahead_expand(state: ConvexGridState, d: int) -> Optional[ConvexGridState]:
    """Expansion under the base rules plus the volume heuristic, if enabled."""
    cand, _ = _legacy_candidate(state, d)
    if cand is None:
        return None
    if state.flags.volume_heuristic and not volume_heuristic(cand.candidate_count, cand.border_count):
        return None
    return cand.state


def corner_second_check(state: ConvexGridState, candidate: ConvexGridState, edge: Edge, d: int,
                        case: str, trims: Dict[Edge, Tuple[int, int]],
                        new_edges: Tuple[Edge, ...], e1_cache: dict) -> bool:
    """Lookahead checks E1 (and E2 for an undetermined corner); False means invalid."""
    side = edge[1] if edge[0] == d else edge[0]
    cand_slope = candidate.corner_slope(d, side)
    if "e1" not in e1_cache:
        e1 = candidate.clone()
        for ne in new_edges:
            sd = ne[1] if ne[0] == d else ne[0]
            e1.bevels.pop(ne, None)
            e1.exclusions.pop(ne, None)
            e1.set_face(sd, trims[ne][1])
        e1._invalidate()
        ok = bool(np.all(e1.lo < e1.hi)) and e1.contains_voxel(e1.seed) and _seed_inside(e1)
        e1_cache["e1"] = _lookahead_expand(e1, d) if ok else None
    e1_state = e1_cache["e1"]
    if e1_state is None:
        return True
    e1_slope = e1_state.corner_slope(d, side)
    if case == DIRECTION_FIXED:
        return not e1_slope < cand_slope
    if e1_slope != 0:
        return True
    e2_state = _lookahead_expand(state.clone(), side)
    if e2_state is None:
        return True
    return e2_state.corner_slope(d, side) != 0


def try_expand_border(state: ConvexGridState, direction) -> ExpansionOutcome:
    """Attempt one border expansion; mutate ``state`` on success, freeze the border otherwise."""
    d = direction_index(direction)
    if state.frozen[d]:
        raise ValueError(f"border {DIRECTION_NAMES[d]} is frozen")

    def reject(reason):
        state.frozen[d] = True
        return ExpansionOutcome(REJECTED, reason)

    cand, reason = _legacy_candidate(state, d)
    if cand is None:
        return reject(reason)
    flags = state.flags
    if flags.volume_heuristic and not volume_heuristic(cand.candidate_count, cand.border_count):
        return reject(VOLUME)
    cases = {e: _classify(state, e, d) for e in cand.new_edges}
    if flags.corner_checks and cand.new_edges:
        for e in cand.new_edges:
            if not corner_first_check(state, cand.state, e, d, cases[e]):
                return reject(CORNER_1)
        cache: dict = {}
        for e in cand.new_edges:
            if not corner_second_check(state, cand.state, e, d, cases[e], cand.trims,
                                       cand.new_edges, cache):
                return reject(CORNER_2)
    new = cand.state
    state.lo, state.hi = new.lo, new.hi
    state.bevels = new.bevels
    state.exclusions = new.exclusions
    state.corner_states = dict(state.corner_states)
    for e in cand.new_edges:
        state.corner_states[e] = cases[e]
    state._mask, state._ids = new._mask, None
    state.expansions_done += 1
    return ExpansionOutcome(ACCEPTED, NONE, state.borders[d], cand.new_edges)


def extract_polyhedron(state: ConvexGridState, prune: bool = True) -> Polyhedron:
    """Metric halfspaces of the inscribed polyhedron (box faces plus bevels)."""
    vs = state.grid.voxel_size
    origin = np.asarray(state.grid.origin)
    normals, offsets, prov = [], [], []
    for d in range(6):
        a, s = DIRS[d]
        n = np.zeros(3)
        n[a] = s
        normals.append(n)
        offsets.append(state.face(d) * vs + s * origin[a])
        prov.append(DIRECTION_NAMES[d])
    for edge in sorted(state.bevels):
        bv = state.bevels[edge]
        (a1, s1), (a2, s2) = DIRS[edge[0]], DIRS[edge[1]]
        n = np.zeros(3)
        n[a1] = bv.coef[0] * s1
        n[a2] = bv.coef[1] * s2
        off = bv.gamma * vs + n @ origin
        norm = np.linalg.norm(n)
        normals.append(n / norm)
        offsets.append(off / norm)
        prov.append(f"{DIRECTION_NAMES[edge[0]]}/{DIRECTION_NAMES[edge[1]]}")
    poly = Polyhedron(np.array(normals), np.array(offsets), tuple(prov))
    return geometry.remove_redundant(poly) if prune else poly


def expand_seed(grid: VoxelGrid, seed, max_expansions: int = 36,
                flags: HeuristicFlags = PROPOSED, trace: Optional[list] = None):
    """Grow a seed by cycling through the six borders.

    Attempts on frozen borders are skipped and only accepted expansions count
    towards ``max_expansions``. Returns ``(state, polyhedron)``.
    """
    if max_expansions < 0:
        raise ValueError("max_expansions must be >= 0")
    state = init_seed(grid, seed, flags)
    while state.expansions_done < max_expansions and not all(state.frozen):
        for d in CYCLE:
            if state.expansions_done >= max_expansions:
                break
            if state.frozen[d]:
                continue
            outcome = try_expand_border(state, d)
            if trace is not None:
                trace.append((DIRECTION_NAMES[d], outcome))
    return state, extract_polyhedron(state)
