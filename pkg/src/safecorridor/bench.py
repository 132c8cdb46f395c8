"""Table-style benchmark over seeded random maps."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import geometry
from .corridor import PlanningError, audit_safety, build_corridor, plan_path
from .expansion import LEGACY, PROPOSED, HeuristicFlags
from .voxel_grid import MapGenParams, generate_random_map

VARIANTS: Dict[str, HeuristicFlags] = {"proposed": PROPOSED, "legacy": LEGACY}
DEFAULT_START = (3.0, 6.0, 6.0)
DEFAULT_GOAL = (47.0, 6.0, 6.0)
VOLUME_NOTE = (
    "volume is the union volume of one corridor's polyhedra, aggregated over maps; "
    "lattice sampling error is at most about surface_area * pitch"
)


class UnsafeCorridorError(RuntimeError):
    """A generated corridor failed the safety audit."""


def summarize(values) -> Dict[str, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"mean": 0.0, "max": 0.0, "std": 0.0}
    return {"mean": float(v.mean()), "max": float(v.max()), "std": float(v.std())}


@dataclass
class MapResult:
    seed: int
    n_polyhedra: int
    constraints: List[int]
    volume: float
    safe: bool
    decomposition_us: float
    plan_us: float


@dataclass
class MetricsRow:
    method: str
    volume: Dict[str, float]
    constraints_per_poly: Dict[str, float]
    polys_per_corridor: Dict[str, float]
    decomposition_us: Dict[str, float]
    safe: bool
    maps: List[MapResult] = field(default_factory=list)

    @classmethod
    def from_maps(cls, method: str, maps: Sequence[MapResult]) -> "MetricsRow":
        return cls(
            method,
            summarize([m.volume for m in maps]),
            summarize([c for m in maps for c in m.constraints]),
            summarize([m.n_polyhedra for m in maps]),
            summarize([m.decomposition_us for m in maps]),
            all(m.safe for m in maps),
            list(maps),
        )

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "volume_m3": self.volume,
            "constraints_per_poly": self.constraints_per_poly,
            "polys_per_corridor": self.polys_per_corridor,
            "safe": self.safe,
            "per_map": [
                {"seed": m.seed, "polyhedra": m.n_polyhedra, "volume_m3": m.volume,
                 "constraints_mean": float(np.mean(m.constraints)), "safe": m.safe}
                for m in self.maps
            ],
        }

    def timing_json(self) -> dict:
        return {
            "decomposition_us": self.decomposition_us,
            "per_map_decomposition_us": [m.decomposition_us for m in self.maps],
            "per_map_plan_us": [m.plan_us for m in self.maps],
        }


def pct(new: float, old: float) -> Optional[float]:
    return None if old == 0 else 100.0 * (new - old) / old


def difference_row(proposed: MetricsRow, legacy: MetricsRow) -> dict:
    out = {}
    for key in ("volume", "constraints_per_poly", "polys_per_corridor"):
        a, b = getattr(proposed, key), getattr(legacy, key)
        out[key] = {"mean": pct(a["mean"], b["mean"]), "max": pct(a["max"], b["max"])}
    return out


@dataclass
class BenchConfig:
    n_maps: int = 10
    rng_base: int = 0
    map_params: MapGenParams = MapGenParams()
    start: tuple = DEFAULT_START
    goal: tuple = DEFAULT_GOAL
    max_expansions: int = 36
    variants: Sequence[str] = ("proposed", "legacy")
    pitch: Optional[float] = None
    max_attempts: Optional[int] = None


def run_bench(cfg: BenchConfig, log=None) -> dict:
    """Build one corridor per map and variant; return the metrics document.

    Maps whose start or goal is blocked, or that have no path, are skipped and
    the next seed is drawn, so exactly ``n_maps`` maps are used.
    """
    pitch = cfg.pitch or cfg.map_params.voxel_size / 3.0
    attempts = cfg.max_attempts or 5 * cfg.n_maps + 10
    used, skipped = [], []
    results: Dict[str, List[MapResult]] = {v: [] for v in cfg.variants}
    warmed = set()
    strict = cfg.max_expansions > 0
    seed = cfg.rng_base
    while len(used) < cfg.n_maps and seed < cfg.rng_base + attempts:
        grid = generate_random_map(replace(cfg.map_params, rng_seed=seed))
        t0 = time.perf_counter()
        try:
            path = plan_path(grid, cfg.start, cfg.goal)
        except PlanningError as exc:
            skipped.append({"seed": seed, "reason": str(exc)})
            seed += 1
            continue
        plan_us = (time.perf_counter() - t0) * 1e6
        for name in cfg.variants:
            flags = VARIANTS[name]
            if name not in warmed:
                build_corridor(grid, path, cfg.max_expansions, flags, strict)
                warmed.add(name)
            t0 = time.perf_counter()
            corridor = build_corridor(grid, path, cfg.max_expansions, flags, strict)
            decomp_us = (time.perf_counter() - t0) * 1e6
            report = audit_safety(corridor, grid)
            if not report.safe:
                raise UnsafeCorridorError(
                    f"map seed {seed}, variant {name}: {len(report.violations)} violations, "
                    f"first {report.violations[:5]}"
                )
            polys = corridor.polyhedra
            res = MapResult(
                seed, len(polys), [p.n_constraints for p in polys],
                geometry.union_volume(polys, pitch, grid.origin), report.safe, decomp_us, plan_us,
            )
            results[name].append(res)
            if log:
                log(f"map {seed} {name}: {res.n_polyhedra} polyhedra, "
                    f"{np.mean(res.constraints):.2f} constr/poly, {res.volume:.1f} m3, "
                    f"{decomp_us / 1e3:.1f} ms")
        used.append(seed)
        seed += 1
    rows = {name: MetricsRow.from_maps(name, results[name]) for name in cfg.variants}
    mp = cfg.map_params
    doc = {
        "params": {
            "extent_m": list(mp.extent_m), "voxel_size": mp.voxel_size,
            "n_obstacles": mp.n_obstacles, "obstacle_side_range_m": list(mp.obstacle_side_range_m),
            "fill_probability": mp.fill_probability, "start": list(cfg.start),
            "goal": list(cfg.goal), "max_expansions": cfg.max_expansions, "pitch": pitch,
            "rng_base": cfg.rng_base, "n_maps": cfg.n_maps,
        },
        "maps_used": used,
        "maps_skipped": skipped,
        "variants": {name: row.to_json() for name, row in rows.items()},
        "volume_note": VOLUME_NOTE,
        "volume_error_bound": f"|error| <~ surface_area * {pitch:g} m",
        "timing": {name: row.timing_json() for name, row in rows.items()},
    }
    if "proposed" in rows and "legacy" in rows:
        doc["difference_pct"] = difference_row(rows["proposed"], rows["legacy"])
    doc["_rows"] = rows
    return doc


def _fmt(d: Dict[str, float], digits: int = 1) -> str:
    return f"{d['mean']:.{digits}f} / {d['max']:.{digits}f} / {d['std']:.{digits}f}"


def format_table(doc: dict) -> str:
    rows: Dict[str, MetricsRow] = doc["_rows"]
    head = f"{'':<10}| {'Volume (m3)':<22}| {'Constr/Poly':<18}| {'Poly/SC':<18}| {'Comp. time (us)':<28}| Safe"
    lines = [head, "-" * len(head)]
    for name, r in rows.items():
        lines.append(
            f"{name:<10}| {_fmt(r.volume):<22}| {_fmt(r.constraints_per_poly):<18}| "
            f"{_fmt(r.polys_per_corridor):<18}| {_fmt(r.decomposition_us, 0):<28}| "
            f"{'yes' if r.safe else 'no'}"
        )
    diff = doc.get("difference_pct")
    if diff:
        def cell(k):
            m, x = diff[k]["mean"], diff[k]["max"]
            return f"{m:+.1f}/{x:+.1f}" if m is not None and x is not None else "-"
        a, b = rows["proposed"].decomposition_us, rows["legacy"].decomposition_us
        t = f"{pct(a['mean'], b['mean']):+.1f}/{pct(a['max'], b['max']):+.1f}" if b["mean"] else "-"
        lines.append("-" * len(head))
        lines.append(
            f"{'diff (%)':<10}| {cell('volume'):<22}| {cell('constraints_per_poly'):<18}| "
            f"{cell('polys_per_corridor'):<18}| {t:<28}| -"
        )
    lines.append(doc["volume_note"])
    return "\n".join(lines)


def public_doc(doc: dict, with_timing: bool = True) -> dict:
    out = {k: v for k, v in doc.items() if not k.startswith("_")}
    if not with_timing:
        out.pop("timing", None)
    return out
