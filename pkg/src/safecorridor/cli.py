"""Command line entry point: ``safecorridor <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 no path, 3 internal
invariant failure (an unsafe corridor).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import geometry
from .bench import VARIANTS, BenchConfig, UnsafeCorridorError, format_table, public_doc, run_bench
from .connectivity import build_graph, validate_graph
from .corridor import CorridorError, PlanningError, audit_safety, build_corridor, plan_path
from .expansion import HeuristicFlags, SeedError, expand_seed
from .io import CorridorFormatError, corridor_to_json, dump_json, export_obj, obj_text
from .voxel_grid import GridError, MapGenParams, generate_random_map, load_grid, save_grid

EXIT_OK, EXIT_USAGE, EXIT_NO_PATH, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flags(args) -> HeuristicFlags:
    if args.legacy_only:
        return HeuristicFlags(False, False)
    return HeuristicFlags(not args.no_volume_heuristic, not args.no_corner_checks)


def _strict(args) -> bool:
    # unit cells along a path only touch, so a zero budget cannot chain
    return not (args.allow_gaps or args.max_exp == 0)


def _map_params(args) -> MapGenParams:
    p = MapGenParams(
        extent_m=tuple(args.extent), voxel_size=args.voxel, n_obstacles=args.obstacles,
        obstacle_side_range_m=tuple(args.side), fill_probability=args.fill, rng_seed=args.rng,
    )
    try:
        p.validate()
    except GridError as exc:
        raise UsageError(str(exc)) from exc
    return p


def _add_map_flags(p, rng_flag=True):
    d = MapGenParams()
    p.add_argument("--extent", type=float, nargs=3, default=list(d.extent_m), metavar=("X", "Y", "Z"))
    p.add_argument("--voxel", type=float, default=d.voxel_size)
    p.add_argument("--obstacles", type=int, default=d.n_obstacles)
    p.add_argument("--side", type=float, nargs=2, default=list(d.obstacle_side_range_m), metavar=("MIN", "MAX"))
    p.add_argument("--fill", type=float, default=d.fill_probability)
    if rng_flag:
        p.add_argument("--rng", type=int, default=d.rng_seed)


def _add_expansion_flags(p):
    p.add_argument("--start", type=float, nargs=3, default=[3.0, 6.0, 6.0])
    p.add_argument("--goal", type=float, nargs=3, default=[47.0, 6.0, 6.0])
    p.add_argument("--max-exp", type=int, default=36)
    p.add_argument("--legacy-only", action="store_true", help="disable both heuristics")
    p.add_argument("--no-volume-heuristic", action="store_true")
    p.add_argument("--no-corner-checks", action="store_true")
    p.add_argument("--allow-gaps", action="store_true",
                   help="keep entries that do not overlap their predecessor (implied by --max-exp 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="safecorridor", description="Safe corridors from voxel grids.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-map", help="write a seeded random map")
    _add_map_flags(g)
    g.add_argument("-o", "--output", required=True)

    c = sub.add_parser("corridor", help="plan a path and decompose it into a safe corridor")
    c.add_argument("map")
    _add_expansion_flags(c)
    c.add_argument("-o", "--output", help="corridor JSON (stdout if omitted)")
    c.add_argument("--obj", help="also write an OBJ mesh")
    c.add_argument("--pitch", type=float, help="union-volume sample pitch (default voxel/3)")
    c.add_argument("--exclude-timing", action="store_true")

    b = sub.add_parser("bench", help="table of metrics over seeded random maps")
    _add_map_flags(b, rng_flag=False)
    b.add_argument("--maps", type=int, default=10)
    b.add_argument("--rng-base", type=int, default=0)
    b.add_argument("--variants", nargs="+", choices=sorted(VARIANTS), default=["proposed", "legacy"])
    b.add_argument("--start", type=float, nargs=3, default=[3.0, 6.0, 6.0])
    b.add_argument("--goal", type=float, nargs=3, default=[47.0, 6.0, 6.0])
    b.add_argument("--max-exp", type=int, default=36)
    b.add_argument("--pitch", type=float)
    b.add_argument("-o", "--output", help="metrics JSON")
    b.add_argument("--exclude-timing", action="store_true")
    b.add_argument("--quiet", action="store_true")

    gr = sub.add_parser("graph", help="connectivity graph and its validation")
    gr.add_argument("map")
    _add_expansion_flags(gr)
    gr.add_argument("--seeds", help="JSON list of voxel indices to grow instead of a corridor")
    gr.add_argument("-o", "--output", help="graph JSON")

    e = sub.add_parser("export-obj", help="corridor JSON to OBJ")
    e.add_argument("corridor")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--with-obstacles", action="store_true", help="export occupied voxels as cubes")
    e.add_argument("--map", help="map file for --with-obstacles (default: map_ref in the JSON)")
    return ap


def _write(text: str, dest: Optional[str]) -> None:
    if dest:
        Path(dest).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen_map(args) -> int:
    grid = generate_random_map(_map_params(args))
    save_grid(grid, args.output)
    print(f"wrote {args.output}: dims {grid.dims}, {grid.n_occupied} occupied voxels", file=sys.stderr)
    return EXIT_OK


def _corridor_metrics(corridor, grid, pitch) -> dict:
    counts = [p.n_constraints for p in corridor.polyhedra]
    return {
        "polyhedra": len(counts),
        "constraints_mean": float(np.mean(counts)) if counts else 0.0,
        "constraints_max": int(max(counts)) if counts else 0,
        "volume_m3": geometry.union_volume(corridor.polyhedra, pitch, grid.origin),
        "volume_pitch": pitch,
    }


def cmd_corridor(args) -> int:
    grid = load_grid(args.map)
    flags = _flags(args)
    t0 = time.perf_counter()
    path = plan_path(grid, args.start, args.goal)
    t1 = time.perf_counter()
    corridor = build_corridor(grid, path, args.max_exp, flags, strict=_strict(args))
    t2 = time.perf_counter()
    report = audit_safety(corridor, grid)
    t3 = time.perf_counter()
    timing = None if args.exclude_timing else {
        "plan_us": (t1 - t0) * 1e6, "decomposition_us": (t2 - t1) * 1e6, "audit_us": (t3 - t2) * 1e6,
    }
    doc = corridor_to_json(corridor, report, map_ref=str(args.map), max_expansions=args.max_exp,
                           flags=flags, timing=timing)
    doc["metrics"] = _corridor_metrics(corridor, grid, args.pitch or grid.voxel_size / 3.0)
    _write(dump_json(doc), args.output)
    if args.obj:
        Path(args.obj).write_text(obj_text(corridor.polyhedra))
    if not report.safe:
        print(f"internal error: unsafe corridor, violations {report.violations[:10]}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        n_maps=args.maps, rng_base=args.rng_base,
        map_params=MapGenParams(tuple(args.extent), args.voxel, args.obstacles, tuple(args.side), args.fill, 0),
        start=tuple(args.start), goal=tuple(args.goal), max_expansions=args.max_exp,
        variants=tuple(args.variants), pitch=args.pitch,
    )
    try:
        cfg.map_params.validate()
    except GridError as exc:
        raise UsageError(str(exc)) from exc
    log = None if args.quiet else (lambda s: print(s, file=sys.stderr))
    doc = run_bench(cfg, log)
    print(format_table(doc))
    if doc["maps_skipped"]:
        print(f"skipped map seeds: {[s['seed'] for s in doc['maps_skipped']]}")
    if args.output:
        dump_json(public_doc(doc, with_timing=not args.exclude_timing), args.output)
    if len(doc["maps_used"]) < cfg.n_maps:
        print(f"only {len(doc['maps_used'])} of {cfg.n_maps} maps had a path", file=sys.stderr)
        return EXIT_NO_PATH
    return EXIT_OK


def _load_seeds(path) -> List[tuple]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("seeds")
    if not isinstance(data, list) or not all(isinstance(s, list) and len(s) == 3 for s in data):
        raise UsageError("seeds file must hold a list of [i, j, k] voxel indices")
    return [tuple(int(c) for c in s) for s in data]


def cmd_graph(args) -> int:
    grid = load_grid(args.map)
    flags = _flags(args)
    if args.seeds:
        states, polys = [], []
        for s in _load_seeds(args.seeds):
            st, poly = expand_seed(grid, s, args.max_exp, flags)
            states.append(st)
            polys.append(poly)
    else:
        path = plan_path(grid, args.start, args.goal)
        corridor = build_corridor(grid, path, args.max_exp, flags, strict=_strict(args))
        states, polys = corridor.states, corridor.polyhedra
    graph = build_graph(states)
    report = validate_graph(states, graph, polys)
    print(f"{len(states)} polyhedra, {graph.pair_checks} pair checks, {len(graph.edges)} edges", file=sys.stderr)
    print(f"overlap test {report.mean_overlap_us:.1f} us/pair, "
          f"feasibility LP {report.mean_feasibility_us:.1f} us/pair", file=sys.stderr)
    doc = {
        "graph": graph.to_json(), "pair_checks": graph.pair_checks, "validation": report.to_json(),
        "timing": {"overlap_us": report.mean_overlap_us, "feasibility_us": report.mean_feasibility_us},
    }
    _write(dump_json(doc), args.output)
    if report.false_negatives:
        print(f"internal error: false negatives {report.false_negatives}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_export_obj(args) -> int:
    try:
        data = json.loads(Path(args.corridor).read_text())
    except json.JSONDecodeError as exc:
        raise CorridorFormatError(f"malformed corridor JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CorridorFormatError("malformed corridor JSON: expected an object")
    obstacles = None
    if args.with_obstacles:
        ref = args.map or data.get("map_ref")
        if not ref:
            raise UsageError("--with-obstacles needs --map or a map_ref in the corridor JSON")
        obstacles = load_grid(ref)
    export_obj(data, args.output, obstacles)
    return EXIT_OK


COMMANDS = {
    "gen-map": cmd_gen_map, "corridor": cmd_corridor, "bench": cmd_bench,
    "graph": cmd_graph, "export-obj": cmd_export_obj,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except PlanningError as exc:
        print(f"no path: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except (UnsafeCorridorError, CorridorError, geometry.GeometryError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, GridError, CorridorFormatError, SeedError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
