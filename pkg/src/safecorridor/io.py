"""Corridor JSON and OBJ mesh export."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from . import geometry
from .corridor import SafeCorridor, SafetyReport
from .expansion import DIRECTION_NAMES, HeuristicFlags
from .geometry import Polyhedron
from .voxel_grid import VoxelGrid


class CorridorFormatError(ValueError):
    """Corridor JSON is missing fields or has the wrong shape."""


def corridor_to_json(corridor: SafeCorridor, safety: SafetyReport, *, map_ref: str = "",
                     max_expansions: int = 36, flags: Optional[HeuristicFlags] = None,
                     timing: Optional[dict] = None) -> dict:
    entries = []
    for e in corridor.entries:
        st = e.state
        entries.append({
            "seed": list(st.seed),
            "path_index": e.path_index,
            "halfspaces": e.polyhedron.to_json(),
            "provenance": list(e.polyhedron.provenance),
            "voxels_bbox": [st.lo.tolist(), st.hi.tolist()],
            "n_voxels": st.n_voxels,
            "constraints": e.polyhedron.n_constraints,
            "frozen": [DIRECTION_NAMES[d] for d in range(6) if st.frozen[d]],
        })
    out = {
        "map_ref": map_ref,
        "max_expansions": max_expansions,
        "flags": None if flags is None else {
            "volume_heuristic": flags.volume_heuristic, "corner_checks": flags.corner_checks,
        },
        "path": [list(p) for p in corridor.path],
        "reseeds": [list(r) for r in corridor.reseeds],
        "gaps": list(corridor.gaps),
        "entries": entries,
        "safety": {"safe": safety.safe, "violations": [[i, list(v)] for i, v in safety.violations]},
    }
    if timing is not None:
        out["timing"] = timing
    return out


def dump_json(data: dict, path=None) -> str:
    text = json.dumps(data, indent=1, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def polyhedra_from_json(data: dict) -> List[Polyhedron]:
    try:
        entries = data["entries"]
        return [Polyhedron.from_json(e["halfspaces"]) for e in entries]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorridorFormatError(f"malformed corridor JSON: {exc}") from exc


def _cube_mesh(lo, hi):
    verts = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    # vertex k has bits (x, y, z) = (k >> 2, k >> 1, k) & 1; faces wound outward
    faces = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]]
    return verts, faces


def obj_text(polyhedra: Iterable[Polyhedron], obstacles: Optional[VoxelGrid] = None) -> str:
    """ASCII OBJ with one object per polyhedron and optional obstacle cubes."""
    lines = ["# safe corridor export"]
    base = 1
    for i, poly in enumerate(polyhedra):
        verts = geometry.enumerate_vertices(poly)
        faces = geometry.face_polygons(poly, verts)
        lines.append(f"o polyhedron_{i}")
        lines.extend(f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in verts)
        lines.extend("f " + " ".join(str(base + k) for k in f) for f in faces)
        base += len(verts)
    if obstacles is not None and obstacles.n_occupied:
        lines.append("o obstacles")
        vs = obstacles.voxel_size
        origin = np.asarray(obstacles.origin)
        for idx in np.argwhere(obstacles.occupancy):
            lo = origin + idx * vs
            verts, faces = _cube_mesh(lo, lo + vs)
            lines.extend(f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in verts)
            lines.extend("f " + " ".join(str(base + k) for k in f) for f in faces)
            base += 8
    return "\n".join(lines) + "\n"


def export_obj(corridor_json: dict, destination, obstacles: Optional[VoxelGrid] = None) -> None:
    Path(destination).write_text(obj_text(polyhedra_from_json(corridor_json), obstacles))


def parse_obj(text: str):
    """Vertices and faces (0-based) of an OBJ string, grouped per object."""
    objects, verts = {}, []
    current = None
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "o":
            current = parts[1]
            objects[current] = []
        elif parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            objects.setdefault(current, []).append([int(x) - 1 for x in parts[1:]])
    return np.array(verts).reshape(-1, 3), objects
