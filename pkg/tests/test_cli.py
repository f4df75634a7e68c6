import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from oracles import (chamfer_loops, coverage_loops, emd_permutations, jsd_bins, mmd_loops,
                     one_nna_loops)
from udckit.cli import load_toy_datum, main, sample_mesh_cloud
from udckit.core import GridSpec, UdcField
from udckit.extractor import extract_mesh
from udckit.mesh_io import read_obj, save_obj
from udckit.shapes import box, cube_sphere, rounded_box
from udckit.udcfile import save_udc


def schema(name):
    return json.loads(resources.files("udckit").joinpath(f"schemas/{name}.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out.strip() else None), err


@pytest.fixture
def cube_obj(tmp_path, cube_mesh):
    p = tmp_path / "cube.obj"
    save_obj(cube_mesh, p)
    return p


@pytest.fixture
def sphere_obj(tmp_path):
    p = tmp_path / "sphere.obj"
    save_obj(cube_sphere(0.4, 16), p)
    return p


def test_fit_cube(capsys, tmp_path, cube_obj):
    code, out, _ = run(capsys, "fit", "--input", cube_obj, "--output", tmp_path / "c.udc", "--res", 64)
    assert code == 0 and out["flags_true"] > 0 and out["cubes"] == 64 ** 3
    jsonschema.validate(out, schema("fit_summary"))
    assert (tmp_path / "c.udc").exists()


def test_fit_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "fit", "--input", tmp_path / "nope.obj", "--output", tmp_path / "x.udc")
    assert code == 2 and "cannot open" in err


def test_fit_bad_resolution(capsys, tmp_path, cube_obj):
    code, _, err = run(capsys, "fit", "--input", cube_obj, "--output", tmp_path / "x.udc", "--res", 1)
    assert code == 2 and "resolution must be ≥ 2" in err


def test_fit_bad_obj(capsys, tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nf 1 2 3\n")
    code, _, err = run(capsys, "fit", "--input", p, "--output", tmp_path / "x.udc")
    assert code == 2 and "line 3" in err


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--bogus"])
    assert exc.value.code == 2


def test_extract_all_false(capsys, tmp_path):
    src = tmp_path / "empty.udc"
    save_udc(UdcField.empty(GridSpec((4, 4, 4))), src)
    code, out, _ = run(capsys, "extract", "--input", src, "--output", tmp_path / "e.obj")
    assert code == 0 and out["triangles"] == 0
    jsonschema.validate(out, schema("extract_summary"))
    text = (tmp_path / "e.obj").read_text()
    assert not any(line.startswith("f ") for line in text.splitlines())


def test_extract_truncated(capsys, tmp_path):
    src = tmp_path / "t.udc"
    save_udc(UdcField.empty(GridSpec((4, 4, 4))), src)
    src.write_bytes(src.read_bytes()[:-5])
    code, _, err = run(capsys, "extract", "--input", src, "--output", tmp_path / "e.obj")
    assert code == 3 and "corrupt" in err


def test_fit_then_extract_reparses(capsys, tmp_path, sphere_obj):
    udc, obj = tmp_path / "s.udc", tmp_path / "s.obj"
    assert run(capsys, "fit", "--input", sphere_obj, "--output", udc, "--res", 24)[0] == 0
    code, out, _ = run(capsys, "extract", "--input", udc, "--output", obj)
    assert code == 0
    mesh = read_obj(obj)
    assert mesh.n_triangles == out["triangles"] == 2 * out["flags_true"]


def test_roundtrip_sphere(capsys, tmp_path, sphere_obj):
    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "roundtrip", "--input", sphere_obj, "--res", 64, "--report", rep)
    assert code == 0
    assert out["chamfer_mean"] <= 2 * math.sqrt(3) / 64
    assert out["nonmanifold_edges"] == 0
    assert json.loads(rep.read_text()) == out
    jsonschema.validate(out, schema("roundtrip_report"))


def test_roundtrip_deterministic(capsys, sphere_obj):
    a = run(capsys, "roundtrip", "--input", sphere_obj, "--res", 16, "--points", 2000)[1]
    b = run(capsys, "roundtrip", "--input", sphere_obj, "--res", 16, "--points", 2000)[1]
    for k in ("elapsed_ms", "peak_rss_bytes"):
        a.pop(k), b.pop(k)
    assert a == b


def test_manifest_with_failure(capsys, tmp_path, cube_obj, sphere_obj):
    man = tmp_path / "list.txt"
    man.write_text(f"{cube_obj}\n{tmp_path / 'missing.obj'}\n\n{sphere_obj}\n")
    code = main(["fit", "--manifest", str(man), "--output", str(tmp_path / "out"), "--res", "8"])
    out = json.loads(capsys.readouterr().out)
    assert code == 2 and out["failed"] == 1 and len(out["items"]) == 2
    jsonschema.validate(out, schema("fit_batch"))
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["cube.udc", "sphere.udc"]


# -- metrics ---------------------------------------------------------------------

def family(tmp_path, name, meshes):
    d = tmp_path / name
    d.mkdir()
    for k, m in enumerate(meshes):
        save_obj(m, d / f"{k:02d}.obj")
    return d


def boxes(n, seed):
    rng = np.random.default_rng(seed)
    return [box(-h, h) for h in rng.uniform(0.1, 0.5, (n, 3))]


def spheres(n):
    return [cube_sphere(0.3, 3, center=(0.0, 0.0, 0.05 * k)) for k in range(n)]


def test_metrics_same_dir(capsys, tmp_path):
    d = family(tmp_path, "a", boxes(4, 0))
    code, out, _ = run(capsys, "metrics", "--gen", d, "--ref", d, "--points", 64)
    assert code == 0
    assert out["JSD"] == 0 and out["COV-CD"] == out["COV-EMD"] == 1.0
    assert out["MMD-CD"] == out["MMD-EMD"] == 0.0
    jsonschema.validate(out, schema("metrics_report"))
    assert out["params"]["points"] == 64 and out["params"]["distance"] == ["CD", "EMD"]


def test_metrics_disjoint_families(capsys, tmp_path):
    flat = [box((-0.5, -0.5, -0.01), (0.5, 0.5, 0.01 + 0.002 * k)) for k in range(5)]
    thin = [box((-0.01, -0.01, -0.5), (0.01 + 0.002 * k, 0.01, 0.5)) for k in range(5)]
    a, b = family(tmp_path, "flat", flat), family(tmp_path, "thin", thin)
    out = run(capsys, "metrics", "--gen", a, "--ref", b, "--points", 256, "--distance", "cd")[1]
    assert out["1-NNA-CD"] >= 90
    assert "COV-EMD" not in out


def test_metrics_match_loop_oracles(capsys, tmp_path):
    gen_m, ref_m = boxes(8, 1), spheres(8)
    a, b = family(tmp_path, "g", gen_m), family(tmp_path, "r", ref_m)
    pts, seed = 6, 3
    out = run(capsys, "metrics", "--gen", a, "--ref", b, "--points", pts, "--seed", seed)[1]
    g = [sample_mesh_cloud(m, pts, [seed, k]) for k, m in enumerate(gen_m)]
    r = [sample_mesh_cloud(m, pts, [seed, k]) for k, m in enumerate(ref_m)]
    gl, rl = [c.tolist() for c in g], [c.tolist() for c in r]
    cd = lambda x, y: chamfer_loops(x, y, "mean")  # noqa: E731
    assert out["JSD"] == pytest.approx(jsd_bins(g, r), abs=1e-9)
    for name, d in (("CD", cd), ("EMD", emd_permutations)):
        assert out[f"COV-{name}"] == pytest.approx(coverage_loops(gl, rl, d), abs=1e-9)
        assert out[f"MMD-{name}"] == pytest.approx(mmd_loops(gl, rl, d), abs=1e-9)
        assert out[f"1-NNA-{name}"] == pytest.approx(one_nna_loops(gl, rl, d), abs=1e-9)


def test_metrics_empty_dir(capsys, tmp_path):
    (tmp_path / "e").mkdir()
    d = family(tmp_path, "a", boxes(1, 0))
    code, _, err = run(capsys, "metrics", "--gen", tmp_path / "e", "--ref", d)
    assert code == 2 and "no OBJ" in err


def test_metrics_bad_distance(capsys, tmp_path):
    d = family(tmp_path, "a", boxes(1, 0))
    assert run(capsys, "metrics", "--gen", d, "--ref", d, "--distance", "lfd")[0] == 2


# -- sample-toy ------------------------------------------------------------------

@pytest.mark.parametrize("seed,T", [(0, 1000), (17, 1000), (5, 1), (8, 10)])
def test_sample_toy_matches_datum(capsys, tmp_path, seed, T):
    obj = tmp_path / "toy.obj"
    code, out, _ = run(capsys, "sample-toy", "--seed", seed, "--T", T, "--output", tmp_path / "toy.udc",
                       "--obj", obj)
    assert code == 0 and out["matches_datum"] is True
    jsonschema.validate(out, schema("sample_toy_report"))
    expect = extract_mesh(load_toy_datum())
    assert read_obj(obj) == read_obj_from(expect, tmp_path)


def read_obj_from(mesh, tmp_path):
    p = tmp_path / "expect.obj"
    save_obj(mesh, p)
    return read_obj(p)


def test_sample_toy_seed_independent(capsys, tmp_path):
    a, b = tmp_path / "a.udc", tmp_path / "b.udc"
    run(capsys, "sample-toy", "--seed", 1, "--output", a, "--T", 50)
    run(capsys, "sample-toy", "--seed", 2, "--output", b, "--T", 50)
    assert a.read_bytes() == b.read_bytes()


def test_toy_datum_is_reasonable():
    toy = load_toy_datum()
    assert toy.grid.dims == (8, 8, 8) and toy.flags_true > 0
    mesh = extract_mesh(toy)
    assert mesh.n_triangles == 2 * toy.flags_true


def test_rounded_box_fixture_roundtrip(capsys, tmp_path):
    p = tmp_path / "rb.obj"
    save_obj(rounded_box((0.4, 0.3, 0.2), 0.08, 8), p)
    out = run(capsys, "roundtrip", "--input", p, "--res", 32, "--points", 5000)[1]
    assert out["chamfer_mean"] <= 2 * math.sqrt(3) / 32
