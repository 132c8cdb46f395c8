"""Effect of each heuristic on its own: corridors built with all four flag
combinations on the same maps."""
import argparse
from dataclasses import replace

import numpy as np

from safecorridor import geometry
from safecorridor.corridor import PlanningError, audit_safety, build_corridor, plan_path
from safecorridor.expansion import HeuristicFlags
from safecorridor.voxel_grid import MapGenParams, generate_random_map

COMBOS = {
    "none": HeuristicFlags(False, False),
    "volume only": HeuristicFlags(True, False),
    "corners only": HeuristicFlags(False, True),
    "both": HeuristicFlags(True, True),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--maps", type=int, default=10)
    args = ap.parse_args()
    rows = {k: {"constraints": [], "polys": [], "volume": []} for k in COMBOS}
    seed = used = 0
    while used < args.maps:
        grid = generate_random_map(replace(MapGenParams(), rng_seed=seed))
        seed += 1
        try:
            path = plan_path(grid, (3, 6, 6), (47, 6, 6))
        except PlanningError:
            continue
        used += 1
        for name, flags in COMBOS.items():
            c = build_corridor(grid, path, 36, flags)
            assert audit_safety(c, grid).safe
            rows[name]["constraints"] += [p.n_constraints for p in c.polyhedra]
            rows[name]["polys"].append(len(c))
            rows[name]["volume"].append(geometry.union_volume(c.polyhedra, 0.1))
    print(f"{'flags':<14}{'constr/poly':>12}{'max':>6}{'poly/SC':>10}{'volume m3':>12}")
    for name, r in rows.items():
        print(f"{name:<14}{np.mean(r['constraints']):>12.2f}{max(r['constraints']):>6}"
              f"{np.mean(r['polys']):>10.1f}{np.mean(r['volume']):>12.1f}")


if __name__ == "__main__":
    main()
