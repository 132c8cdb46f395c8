"""Halfspace polyhedra: containment, intersection tests, vertices and volume.

A polyhedron is the set ``{x : normals @ x <= offsets}`` with unit normals.
Linear feasibility questions go through :func:`scipy.optimize.linprog`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

TOL = 1e-9


class GeometryError(ValueError):
    """Empty or unbounded input where a bounded non-empty polyhedron is required."""


@dataclass
class Polyhedron:
    normals: np.ndarray
    offsets: np.ndarray
    provenance: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        self.offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if len(self.offsets) != len(self.normals):
            raise GeometryError("normals and offsets differ in length")
        norm = np.linalg.norm(self.normals, axis=1)
        if (norm < 1e-12).any():
            raise GeometryError("halfspace with a zero normal")
        self.normals = self.normals / norm[:, None]
        self.offsets = self.offsets / norm
        if not self.provenance:
            self.provenance = tuple("?" for _ in self.offsets)
        self.provenance = tuple(self.provenance)

    def __len__(self) -> int:
        return len(self.offsets)

    @property
    def n_constraints(self) -> int:
        return len(self.offsets)

    @classmethod
    def from_box(cls, lo, hi) -> "Polyhedron":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        eye = np.eye(3)
        normals = np.concatenate([eye, -eye])
        offsets = np.concatenate([hi, -lo])
        prov = ("+x", "+y", "+z", "-x", "-y", "-z")
        return cls(normals, offsets, prov)

    def subset(self, keep) -> "Polyhedron":
        keep = list(keep)
        return Polyhedron(
            self.normals[keep], self.offsets[keep], tuple(self.provenance[i] for i in keep)
        )

    def to_json(self) -> list:
        return [
            {"n": [float(c) for c in n], "d": float(d)}
            for n, d in zip(self.normals, self.offsets)
        ]

    @classmethod
    def from_json(cls, items) -> "Polyhedron":
        if not items:
            return cls(np.zeros((0, 3)), np.zeros(0))
        return cls([h["n"] for h in items], [h["d"] for h in items])


HalfspaceSet = Polyhedron


def contains_point(hs: Polyhedron, p, tol: float = 0.0) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(np.all(hs.normals @ p <= hs.offsets + tol))


def contains_points(hs: Polyhedron, pts, tol: float = 0.0) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    return np.all(pts @ hs.normals.T <= hs.offsets + tol, axis=1)


def _box_support_min(normals, lo, hi):
    # min over the box of n.x, for every normal
    return np.where(normals > 0, normals * lo, normals * hi).sum(axis=1)


def box_intersects(hs: Polyhedron, box_lo, box_hi, margin: float = 0.0) -> bool:
    """Whether the closed box, shrunk by ``margin`` on every side, meets the closed polyhedron.

    ``margin > 0`` turns the question into "does the polyhedron enter the open
    box", which is what a safety audit needs: inscribed polyhedra share faces
    with the occupied cells around them.
    """
    lo = np.asarray(box_lo, dtype=float) + margin
    hi = np.asarray(box_hi, dtype=float) - margin
    if np.any(lo > hi):
        return False
    if np.any(_box_support_min(hs.normals, lo, hi) > hs.offsets + TOL * 1e-3):
        return False
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    if np.any(contains_points(hs, corners)):
        return True
    res = linprog(
        np.zeros(3), A_ub=hs.normals, b_ub=hs.offsets,
        bounds=list(zip(lo, hi)), method="highs",
    )
    return res.status == 0


def _interior_depth(normals, offsets) -> float:
    """Radius of the largest ball inside the polyhedron (capped at 1e6); -inf if empty."""
    norms = np.linalg.norm(normals, axis=1)
    A = np.hstack([normals, norms[:, None]])
    c = np.array([0.0, 0.0, 0.0, -1.0])
    res = linprog(
        c, A_ub=A, b_ub=offsets,
        bounds=[(None, None)] * 3 + [(None, 1e6)], method="highs",
    )
    if res.status == 2:
        return -np.inf
    if res.status != 0:
        raise GeometryError(f"linear program failed: {res.message}")
    return float(res.x[3])


def is_nonempty(hs: Polyhedron, tol: float = TOL) -> bool:
    return _interior_depth(hs.normals, hs.offsets) > tol


def polyhedra_intersect_feasibility(a: Polyhedron, b: Polyhedron, check_inputs: bool = True) -> bool:
    """Separating-plane style test: do the interiors of ``a`` and ``b`` overlap?

    Solved as one linear program (largest ball inside both); the pair is
    disjoint exactly when a separating plane exists. Touching polyhedra count
    as disjoint.
    """
    if check_inputs:
        for name, p in (("first", a), ("second", b)):
            if len(p) == 0 or not is_nonempty(p):
                raise GeometryError(f"{name} polyhedron is empty")
    normals = np.concatenate([a.normals, b.normals])
    offsets = np.concatenate([a.offsets, b.offsets])
    return _interior_depth(normals, offsets) > TOL


def _is_bounded(hs: Polyhedron) -> bool:
    for axis in range(3):
        for sign in (1.0, -1.0):
            c = np.zeros(3)
            c[axis] = -sign
            res = linprog(c, A_ub=hs.normals, b_ub=hs.offsets,
                          bounds=[(None, None)] * 3, method="highs")
            if res.status == 3:
                return False
    return True


def vertices(normals: np.ndarray, offsets: np.ndarray, tol: float = TOL) -> np.ndarray:
    """All feasible triple-plane intersections, deduplicated. Assumes boundedness."""
    m = len(offsets)
    if m < 3:
        return np.zeros((0, 3))
    combos = np.array(list(itertools.combinations(range(m), 3)))
    A = normals[combos]
    b = offsets[combos]
    with np.errstate(divide="ignore", invalid="ignore"):
        det = np.linalg.det(A)
    ok = np.abs(det) > 1e-12
    if not ok.any():
        return np.zeros((0, 3))
    pts = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    scale = 1.0 + np.abs(offsets).max()
    inside = np.all(pts @ normals.T <= offsets + tol * scale, axis=1)
    pts = pts[inside]
    return _dedupe(pts, tol * scale)


def _dedupe(pts: np.ndarray, tol: float) -> np.ndarray:
    out: List[np.ndarray] = []
    for p in pts[np.lexsort(pts.T[::-1])] if len(pts) else pts:
        if not out or np.max(np.abs(np.array(out) - p), axis=1).min() > tol:
            out.append(p)
    return np.array(out).reshape(-1, 3)


def enumerate_vertices(hs: Polyhedron) -> np.ndarray:
    if len(hs) < 4 or not _is_bounded(hs):
        raise GeometryError("polyhedron is unbounded")
    return vertices(hs.normals, hs.offsets)


def facet_mask(hs: Polyhedron, verts: np.ndarray = None, tol: float = TOL) -> np.ndarray:
    """True for halfspaces whose plane carries a 2D face; duplicate planes keep only the first."""
    if verts is None:
        verts = vertices(hs.normals, hs.offsets)
    scale = 1.0 + (np.abs(hs.offsets).max() if len(hs) else 0.0)
    keep = np.zeros(len(hs), dtype=bool)
    seen: List[int] = []
    for i, (n, d) in enumerate(zip(hs.normals, hs.offsets)):
        on = verts[np.abs(verts @ n - d) <= tol * scale]
        if len(on) < 3:
            continue
        rank = np.linalg.matrix_rank(on[1:] - on[0], tol=1e-7 * scale)
        if rank < 2:
            continue
        if any(np.allclose(n, hs.normals[j], atol=1e-9) and abs(d - hs.offsets[j]) <= tol * scale
               for j in seen):
            continue
        seen.append(i)
        keep[i] = True
    return keep


def remove_redundant(hs: Polyhedron) -> Polyhedron:
    return hs.subset(np.flatnonzero(facet_mask(hs)))


def face_polygons(hs: Polyhedron, verts: np.ndarray, tol: float = TOL) -> List[List[int]]:
    """Vertex indices of each facet, counter-clockwise seen from outside."""
    scale = 1.0 + np.abs(hs.offsets).max()
    faces = []
    for n, d in zip(hs.normals, hs.offsets):
        idx = np.flatnonzero(np.abs(verts @ n - d) <= tol * scale)
        if len(idx) < 3:
            continue
        pts = verts[idx]
        c = pts.mean(axis=0)
        ref = pts[0] - c
        if np.linalg.norm(ref) < tol:
            continue
        e1 = ref / np.linalg.norm(ref)
        e2 = np.cross(n, e1)
        ang = np.arctan2((pts - c) @ e2, (pts - c) @ e1)
        faces.append([int(i) for i in idx[np.argsort(ang)]])
    return faces


def bounding_box(hs: Polyhedron) -> Tuple[np.ndarray, np.ndarray]:
    v = vertices(hs.normals, hs.offsets)
    if len(v) == 0:
        raise GeometryError("polyhedron has no vertices")
    return v.min(axis=0), v.max(axis=0)


def union_volume(polys: Sequence[Polyhedron], sample_pitch: float, anchor=(0.0, 0.0, 0.0)) -> float:
    """Volume of the union by counting cell-centred lattice samples.

    Samples sit at ``anchor + pitch * (k + 1/2)``. The estimate is exact for
    boxes aligned to the sample lattice; otherwise the error is bounded by
    roughly surface_area * pitch.
    """
    if sample_pitch <= 0:
        raise ValueError("sample_pitch must be positive")
    polys = [p for p in polys if len(p)]
    if not polys:
        return 0.0
    anchor = np.asarray(anchor, dtype=float)
    boxes = [bounding_box(p) for p in polys]
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    k0 = np.floor((lo - anchor) / sample_pitch).astype(int) - 1
    k1 = np.ceil((hi - anchor) / sample_pitch).astype(int) + 1
    shape = tuple(k1 - k0)
    hit = np.zeros(shape, dtype=bool)
    for p, (blo, bhi) in zip(polys, boxes):
        a = np.floor((blo - anchor) / sample_pitch).astype(int) - k0
        b = np.ceil((bhi - anchor) / sample_pitch).astype(int) - k0 + 1
        axes = [anchor[i] + sample_pitch * (np.arange(a[i], b[i]) + k0[i] + 0.5) for i in range(3)]
        X, Y, Z = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
        inside = contains_points(p, pts).reshape(X.shape)
        hit[a[0]:b[0], a[1]:b[1], a[2]:b[2]] |= inside
    return float(hit.sum()) * sample_pitch ** 3


def polyhedron_volume(hs: Polyhedron) -> float:
    """Exact volume via the convex hull of the vertices."""
    from scipy.spatial import ConvexHull

    v = vertices(hs.normals, hs.offsets)
    if len(v) < 4:
        return 0.0
    return float(ConvexHull(v).volume)
