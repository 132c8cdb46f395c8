import json
import subprocess
import sys

import numpy as np
import pytest

from safecorridor.cli import main
from safecorridor.io import parse_obj
from safecorridor.voxel_grid import MapGenParams, generate_random_map, load_grid, save_grid, create_grid


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def map7(tmp_path_factory):
    path = tmp_path_factory.mktemp("maps") / "m7.scg"
    assert run("gen-map", "--extent", 50, 12, 12, "--voxel", 0.3, "--obstacles", 400,
               "--side", 0.9, 1.5, "--fill", 0.5, "--rng", 7, "-o", path) == 0
    return path


@pytest.fixture(scope="module")
def free_map(tmp_path_factory):
    path = tmp_path_factory.mktemp("maps") / "free.scg"
    assert run("gen-map", "--obstacles", 0, "-o", path) == 0
    return path


def test_gen_map_round_trip(map7):
    assert load_grid(map7) == generate_random_map(MapGenParams(rng_seed=7))


def test_gen_map_without_obstacles(free_map):
    assert load_grid(free_map).n_occupied == 0


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("gen-map", "--rng", 1)
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        run("corridor")
    assert exc.value.code == 1
    assert run("gen-map", "--fill", 2.0, "-o", tmp_path / "x.scg") == 1
    proc = subprocess.run([sys.executable, "-m", "safecorridor.cli", "gen-map"], capture_output=True)
    assert proc.returncode == 1


def test_corridor_json(map7, tmp_path):
    out = tmp_path / "c.json"
    assert run("corridor", map7, "--start", 3, 6, 6, "--goal", 47, 6, 6, "--max-exp", 36, "-o", out) == 0
    doc = json.loads(out.read_text())
    assert doc["safety"]["safe"] is True
    assert doc["metrics"]["polyhedra"] == len(doc["entries"]) > 1
    for e in doc["entries"]:
        assert e["constraints"] == len(e["halfspaces"])
        assert all(set(h) == {"n", "d"} for h in e["halfspaces"])
        lo, hi = e["voxels_bbox"]
        assert all(a < b for a, b in zip(lo, hi))
    assert set(doc["timing"]) == {"plan_us", "decomposition_us", "audit_us"}


def test_corridor_is_deterministic(map7, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("corridor", map7, "--legacy-only", "--exclude-timing", "-o", out) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["flags"] == {"volume_heuristic": False, "corner_checks": False}


def test_corridor_flag_variants(map7, tmp_path):
    out = tmp_path / "v.json"
    assert run("corridor", map7, "--no-corner-checks", "--exclude-timing", "-o", out) == 0
    assert json.loads(out.read_text())["flags"] == {"volume_heuristic": True, "corner_checks": False}


def test_zero_budget_corridor(map7, tmp_path):
    out = tmp_path / "z.json"
    assert run("corridor", map7, "--max-exp", 0, "--exclude-timing", "-o", out) == 0
    doc = json.loads(out.read_text())
    assert len(doc["entries"]) == len(doc["path"])
    assert all(e["n_voxels"] == 1 and e["constraints"] == 6 for e in doc["entries"])
    assert doc["safety"]["safe"]


def test_no_path_exit_code(tmp_path):
    g = create_grid((6, 3, 3), 1.0)
    g.occupancy[3] = True
    save_grid(g, tmp_path / "wall.scg")
    assert run("corridor", tmp_path / "wall.scg", "--start", 0.5, 1.5, 1.5, "--goal", 5.5, 1.5, 1.5) == 2
    assert run("corridor", tmp_path / "wall.scg", "--start", 3.5, 1.5, 1.5, "--goal", 5.5, 1.5, 1.5) == 2


def test_bench_free_map(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert run("bench", "--maps", 1, "--obstacles", 0, "--variants", "proposed", "--quiet", "-o", out) == 0
    doc = json.loads(out.read_text())
    row = doc["variants"]["proposed"]
    assert row["polys_per_corridor"]["mean"] == 21
    assert row["constraints_per_poly"] == {"mean": 6.0, "max": 6.0, "std": 0.0}
    assert "proposed" in capsys.readouterr().out
    short = tmp_path / "s.json"
    assert run("bench", "--maps", 1, "--obstacles", 0, "--variants", "proposed", "--quiet",
               "--goal", 4.5, 6, 6, "-o", short, "--exclude-timing") == 0
    doc = json.loads(short.read_text())
    assert doc["variants"]["proposed"]["polys_per_corridor"]["mean"] == 1
    assert "timing" not in doc


def test_bench_difference_row(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert run("bench", "--maps", 2, "--quiet", "-o", out) == 0
    doc = json.loads(out.read_text())
    text = capsys.readouterr().out
    assert "diff (%)" in text
    p, l = doc["variants"]["proposed"], doc["variants"]["legacy"]
    want = 100 * (p["constraints_per_poly"]["mean"] - l["constraints_per_poly"]["mean"]) / l["constraints_per_poly"]["mean"]
    assert doc["difference_pct"]["constraints_per_poly"]["mean"] == pytest.approx(want)
    for row in (p, l):
        for key in ("volume_m3", "constraints_per_poly", "polys_per_corridor"):
            assert row[key]["max"] >= row[key]["mean"] and row[key]["std"] >= 0
    assert set(doc["timing"]) == {"proposed", "legacy"}


def test_bench_skips_blocked_maps(tmp_path):
    # map seed 8 has an occupied goal voxel
    out = tmp_path / "k.json"
    assert run("bench", "--maps", 1, "--rng-base", 8, "--variants", "legacy", "--quiet", "-o", out) == 0
    doc = json.loads(out.read_text())
    assert [s["seed"] for s in doc["maps_skipped"]] == [8]
    assert doc["maps_used"] == [9]


def test_graph_with_seeds(free_map, tmp_path):
    seeds = tmp_path / "seeds.json"
    seeds.write_text(json.dumps([[10, 20, 20], [17, 20, 20], [24, 20, 20], [100, 20, 20]]))
    out = tmp_path / "g.json"
    assert run("graph", free_map, "--seeds", seeds, "-o", out) == 0
    doc = json.loads(out.read_text())
    assert doc["pair_checks"] == 6
    assert doc["graph"]["edges"] == [[0, 1], [1, 2]]
    assert doc["validation"]["false_negatives"] == []
    seeds.write_text(json.dumps([[10, 20, 20]]))
    assert run("graph", free_map, "--seeds", seeds, "-o", out) == 0
    assert json.loads(out.read_text())["graph"]["edges"] == []
    seeds.write_text("[[1, 2]]")
    assert run("graph", free_map, "--seeds", seeds, "-o", out) == 1


def test_graph_on_corridor(map7, tmp_path):
    out = tmp_path / "g.json"
    assert run("graph", map7, "-o", out) == 0
    doc = json.loads(out.read_text())
    n = len(doc["graph"]["nodes"])
    assert doc["pair_checks"] == n * (n - 1) // 2
    assert doc["validation"]["false_negatives"] == []


def test_export_single_cube(free_map, tmp_path):
    cj, obj = tmp_path / "one.json", tmp_path / "one.obj"
    assert run("corridor", free_map, "--start", 3, 6, 6, "--goal", 3, 6, 6, "--max-exp", 0, "-o", cj) == 0
    assert run("export-obj", cj, "-o", obj) == 0
    verts, objects = parse_obj(obj.read_text())
    assert len(verts) == 8
    (faces,) = objects.values()
    assert len(faces) == 6 and all(len(f) == 4 for f in faces)


def test_export_bevel_normals(map7, tmp_path):
    cj, obj = tmp_path / "c.json", tmp_path / "c.obj"
    assert run("corridor", map7, "-o", cj) == 0
    assert run("export-obj", cj, "-o", obj, "--with-obstacles") == 0
    verts, objects = parse_obj(obj.read_text())
    n_entries = len(json.loads(cj.read_text())["entries"])
    assert len([k for k in objects if k.startswith("polyhedron_")]) == n_entries
    assert len(objects["obstacles"]) == 6 * load_grid(map7).n_occupied
    skew = 0
    for name, faces in objects.items():
        if name == "obstacles":
            continue
        for f in faces:
            a, b, c = verts[f[0]], verts[f[1]], verts[f[2]]
            n = np.cross(b - a, c - a)
            n /= np.linalg.norm(n)
            skew += not np.isclose(np.abs(n), 1.0).any()
    assert skew > 0


def test_export_empty_and_malformed(tmp_path):
    empty, obj = tmp_path / "e.json", tmp_path / "e.obj"
    empty.write_text(json.dumps({"entries": []}))
    assert run("export-obj", empty, "-o", obj) == 0
    verts, objects = parse_obj(obj.read_text())
    assert len(verts) == 0 and objects == {}
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("export-obj", bad, "-o", obj) == 1
    bad.write_text(json.dumps({"entries": [{"halfspaces": [{"n": [1, 0]}]}]}))
    assert run("export-obj", bad, "-o", obj) == 1
