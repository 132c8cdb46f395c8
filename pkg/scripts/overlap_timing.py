"""Shared-voxel test against the polyhedron intersection LP on 6x6x6 convex grids."""
import argparse
import time

import numpy as np

from safecorridor.connectivity import grids_overlap
from safecorridor.expansion import ConvexGridState, extract_polyhedron
from safecorridor.geometry import polyhedra_intersect_feasibility
from safecorridor.voxel_grid import VoxelGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--side", type=int, default=6)
    args = ap.parse_args()
    k = args.side
    grid = VoxelGrid((4 * k, 4 * k, 4 * k), 0.3)
    rng = np.random.default_rng(0)

    def cube(lo):
        return ConvexGridState(grid, tuple(int(c) for c in lo), lo, lo + k)

    pairs = []
    for _ in range(args.pairs):
        a = rng.integers(0, 3 * k, 3)
        b = np.clip(a + rng.integers(-k, k + 1, 3), 0, 3 * k)
        pairs.append((cube(a), cube(b)))
    for a, b in pairs:
        a.voxel_ids, b.voxel_ids
    polys = [(extract_polyhedron(a), extract_polyhedron(b)) for a, b in pairs]

    t0 = time.perf_counter()
    hits = sum(grids_overlap(a, b) for a, b in pairs)
    t_grid = (time.perf_counter() - t0) / len(pairs)
    t0 = time.perf_counter()
    lp_hits = sum(polyhedra_intersect_feasibility(a, b, check_inputs=False) for a, b in polys)
    t_lp = (time.perf_counter() - t0) / len(pairs)
    print(f"{len(pairs)} pairs of {k ** 3}-voxel grids, {hits} share a voxel, {lp_hits} overlap in volume")
    print(f"grids_overlap      {t_grid * 1e6:8.2f} us/pair")
    print(f"feasibility LP     {t_lp * 1e6:8.2f} us/pair")
    print(f"ratio              {t_lp / t_grid:8.0f}x")


if __name__ == "__main__":
    main()
