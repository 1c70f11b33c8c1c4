import json
import os
import subprocess
import sys

import numpy as np
import pytest

from liecluster.algebra import rep_to_dict, rep_to_json
from liecluster.cli import main
from liecluster.cluster import PointCloud
from liecluster.cluster.io import cloud_to_json
from liecluster.irreps import so3_irrep, su2_irrep


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)


# --- cg / couple --------------------------------------------------------------------

@pytest.mark.parametrize("argv,mult", [
    (("cg", "SU2", "1", "1", "0"), 1),
    (("cg", "SU2", "0", "0", "2"), 0),
    (("cg", "SU3", "[1,0,0]", "[1,1,0]", "[0,0,0]"), 1),
    (("cg", "SO3", "1", "1", "1"), 1),
    (("couple", "SO3", "1", "2", "0"), 1),
    (("couple", "SO3", "1", "2", "1"), 0),
    (("couple", "SU2", "1", "3", "3"), 1),
])
def test_table_commands(capsys, tmp_path, argv, mult):
    out_path = str(tmp_path / "t.json")
    code, out, err = run(capsys, *argv, "-o", out_path)
    assert code == 0
    assert f"multiplicity: {mult}" in out
    assert ("warning" in out) == (mult == 0)
    table = json.loads(read(out_path))
    assert table["multiplicity"] == mult
    if mult == 0:
        assert table["entries"] == []


def test_table_to_stdout(capsys):
    code, out, err = run(capsys, "cg", "SU2", "1", "1", "2")
    assert code == 0 and "multiplicity: 1" in err
    assert json.loads(out)["multiplicity"] == 1


@pytest.mark.parametrize("argv", [
    ("cg", "SU2", "x", "1", "0"),
    ("cg", "G2", "1", "1", "0"),
    ("cg", "SU2", "1", "1", "-2"),
    ("couple", "SO3", "1", "0", "0"),
    ("couple", "SO3", "1", "2", "0", "-o", "/nonexistent-dir/t.json"),
])
def test_table_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cg", "SU2", "1", "1", "0", "--bogus"])
    assert exc.value.code == 2


def test_cache_byte_identical(capsys, tmp_path):
    cache = str(tmp_path / "cache")
    a, b, c = (str(tmp_path / n) for n in ("a.json", "b.json", "c.json"))
    assert run(capsys, "--cache-dir", cache, "couple", "SO3", "1", "3", "1", "-o", a)[0] == 0
    assert len(os.listdir(cache)) == 1
    assert run(capsys, "couple", "SO3", "1", "3", "1", "-o", b, "--cache-dir", cache)[0] == 0
    assert run(capsys, "couple", "SO3", "1", "3", "1", "-o", c)[0] == 0
    cached = os.path.join(cache, os.listdir(cache)[0])
    assert read(a) == read(b) == read(c) == read(cached)


# --- check ----------------------------------------------------------------------------

def test_check_pass(capsys, tmp_path):
    path = write(tmp_path / "r.json", rep_to_json(su2_irrep(2)))
    code, out, _ = run(capsys, "check", path)
    assert code == 0 and "status: PASS" in out and "max_commutator_residual" in out


def test_check_perturbed(capsys, tmp_path):
    d = rep_to_dict(so3_irrep(1))
    d["infinitesimal"][0][0][1][0] += 1e-3
    code, out, _ = run(capsys, "check", write(tmp_path / "r.json", json.dumps(d)))
    assert code == 1 and "status: FAIL" in out


def test_check_malformed(capsys, tmp_path):
    text = rep_to_json(su2_irrep(1))
    assert run(capsys, "check", write(tmp_path / "r.json", text[: len(text) // 2]))[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "check", write(tmp_path / "l.json", "[1, 2]"))[0] == 2


# --- features -----------------------------------------------------------------------------

SCALAR_CFG = {"embedding": {"kind": "radial_harmonic", "l_max": 2, "n_max": 2, "r_cut": 3.0},
              "mode": "trace", "channels": 2, "correlation_order": 3, "outputs": ["O3(0,1)"]}
MACE_CFG = {"embedding": {"kind": "rep_coordinates", "input": "so13_vector"}, "layers": 2,
            "hidden": [["SO13(0,0)", "SO13(1,1)"], ["SO13(0,0)"]], "nu_per_layer": [2, 2]}


@pytest.fixture
def cloud_file(tmp_path):
    raw = np.random.default_rng(5).normal(size=(5, 3))
    return write(tmp_path / "cloud.json", cloud_to_json(PointCloud(raw))), raw


def test_features_permutation_byte_identical(capsys, tmp_path, cloud_file):
    path, raw = cloud_file
    cfg = write(tmp_path / "cfg.json", json.dumps(SCALAR_CFG))
    perm = write(tmp_path / "perm.json", cloud_to_json(PointCloud(raw[[3, 0, 4, 2, 1]])))
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert run(capsys, "features", cfg, path, "-o", a)[0] == 0
    assert run(capsys, "features", cfg, perm, "-o", b)[0] == 0
    assert read(a) == read(b)


def test_features_empty_cloud(capsys, tmp_path):
    cfg = write(tmp_path / "cfg.json", json.dumps(SCALAR_CFG))
    empty = write(tmp_path / "empty.json", '{"particles": []}')
    code, out, _ = run(capsys, "features", cfg, empty)
    assert code == 0
    doc = json.loads(out)
    assert doc["blocks"] and all(x == 0 for b in doc["blocks"] for v in b["values"] for x in v)


def test_features_rotated_compare(capsys, tmp_path, cloud_file):
    path, raw = cloud_file
    cfg = write(tmp_path / "cfg.json", json.dumps(SCALAR_CFG))
    q, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)))
    rot = write(tmp_path / "rot.txt", "\n".join(" ".join(repr(float(v)) for v in row) for row in raw @ q.T))
    ref = str(tmp_path / "ref.json")
    assert run(capsys, "features", cfg, path, "-o", ref)[0] == 0
    code, out, err = run(capsys, "features", cfg, rot, "-o", str(tmp_path / "r.json"), "--compare", ref)
    assert code == 0, err
    diff = float(out.split("max abs difference:")[1])
    assert diff < 1e-8


def test_features_mace(capsys, tmp_path):
    cfg = write(tmp_path / "cfg.json", json.dumps(MACE_CFG))
    raw = np.random.default_rng(2).normal(size=(3, 4))
    cloud = write(tmp_path / "c.txt", "\n".join(" ".join(repr(float(v)) for v in row) for row in raw))
    code, out, err = run(capsys, "--seed", "3", "features", cfg, cloud)
    assert code == 0, err
    doc = json.loads(out)
    assert doc["kind"] == "particles" and [s["layer"] for s in doc["states"]] == [1, 2]
    assert doc["states"][0]["shape"] == [3, 2, 5]


def test_features_no_compute(capsys, tmp_path, cloud_file):
    path, _ = cloud_file
    cfg = write(tmp_path / "cfg.json", json.dumps(SCALAR_CFG))
    cache = str(tmp_path / "cache")
    assert run(capsys, "--cache-dir", cache, "features", cfg, path, "--no-compute")[0] == 3
    code, first, _ = run(capsys, "--cache-dir", cache, "features", cfg, path)
    assert code == 0 and os.listdir(cache)
    code, again, _ = run(capsys, "--cache-dir", cache, "features", cfg, path, "--no-compute")
    assert code == 0 and again == first


def test_features_explicit_tables(capsys, tmp_path, cloud_file):
    """Tables listed in the config are used before the (empty) cache."""
    path, _ = cloud_file
    cache = tmp_path / "cache"
    cfg = write(tmp_path / "cfg.json", json.dumps(SCALAR_CFG))
    code, ref, _ = run(capsys, "--cache-dir", str(cache), "features", cfg, path)
    assert code == 0
    listed = dict(SCALAR_CFG, coupling_tables=sorted(os.path.join("cache", f) for f in os.listdir(cache)))
    cfg2 = write(tmp_path / "cfg2.json", json.dumps(listed))
    empty = str(tmp_path / "empty")
    code, out, err = run(capsys, "--cache-dir", empty, "features", cfg2, path, "--no-compute")
    assert code == 0, err
    assert out == ref
    assert not os.path.exists(empty) or not os.listdir(empty)


@pytest.mark.parametrize("cfg", [
    {"embedding": {"kind": "nope"}},
    {"embedding": {"kind": "radial_harmonic"}, "bogus": 1},
    {"mode": "trace"},
    {"embedding": {"kind": "rep_coordinates", "input": "so13_vector"}, "layers": 3, "nu_per_layer": [1]},
])
def test_features_bad_config(capsys, tmp_path, cloud_file, cfg):
    path, _ = cloud_file
    assert run(capsys, "features", write(tmp_path / "cfg.json", json.dumps(cfg)), path)[0] == 2


def test_features_bad_cloud(capsys, tmp_path):
    cfg = write(tmp_path / "cfg.json", json.dumps(SCALAR_CFG))
    assert run(capsys, "features", cfg, write(tmp_path / "c.txt", "1 2\n3 4 5\n"))[0] == 2
    assert run(capsys, "features", cfg, write(tmp_path / "d.txt", "1 2 3 4 5\n"))[0] == 2
    assert run(capsys, "features", cfg, str(tmp_path / "missing.txt"))[0] == 2


# --- demo -----------------------------------------------------------------------------------

@pytest.mark.parametrize("task", ["o3-invariant", "lorentz-mass"])
def test_demo_deterministic(capsys, task):
    code, out, _ = run(capsys, "demo", task, "--seed", "7")
    assert code == 0 and "status: PASS" in out
    assert run(capsys, "--seed", "7", "demo", task)[1] == out
    assert run(capsys, "demo", task, "--seed", "7", "--threads", "3")[1] == out


def test_demo_bad_task(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["demo", "nope"])
    assert exc.value.code == 2


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "liecluster.cli", "cg", "SU2", "1", "1", "0"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["multiplicity"] == 1
