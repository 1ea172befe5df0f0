import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from complcharge.cli import main
from complcharge.cli import cache
from complcharge.cli.config import ConfigError, load_config, validate
from complcharge.cli.export import HEADER, export_quadruple, read_quadruple_csv
from complcharge.cubature import build_box, build_cylinder
from complcharge.operator import from_matrix
from complcharge.spectral import decompose
from complcharge.synthesis import weak_quadruple

jsonschema = pytest.importorskip("jsonschema")

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())

SMALL = """
[domain]
shape = "cylinder"
[domain.dimensions]
radius = 1.0
height = 1.0
[domain.resolutions]
nr = 2
ntheta = 4
nz = 3
[kernel]
kind = "{kind}"
sigma = 0.5
epsilon = 0.1
d = 1.2
[synthesis]
mode = "{mode}"
i = {i}
j = {j}
k = {k}
{extra}
[output]
report_path = "out/report.json"
export_path = "out/quadruple.csv"
cache_dir = "out/cache"
"""


def write_config(tmp_path, kind="smooth_gaussian", mode="strong", i=0, j=1, k=2, extra=""):
    path = tmp_path / "run.toml"
    path.write_text(SMALL.format(kind=kind, mode=mode, i=i, j=j, k=k, extra=extra))
    return path


def read_report(tmp_path):
    return json.loads((tmp_path / "out" / "report.json").read_text())


def without_timestamp(report):
    return {key: value for key, value in report.items() if key != "generated_at"}


# -- full runs -------------------------------------------------------------

def test_run_passes_and_validates(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    report = read_report(tmp_path)
    jsonschema.validate(report, SCHEMA)
    assert report["overall_pass"] is True
    names = [c["name"] for c in report["verification"]["conditions"]]
    assert len(names) == 10 == len(set(names))
    assert report["closed_form_max_rel_error"] < 1e-10
    assert (tmp_path / "out" / "quadruple.csv").exists()


def test_warm_cache_report_identical(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    first = read_report(tmp_path)
    blobs = {p.name: p.read_bytes() for p in (tmp_path / "out" / "cache").glob("*.bin")}
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    assert without_timestamp(read_report(tmp_path)) == without_timestamp(first)
    for name, blob in blobs.items():
        assert (tmp_path / "out" / "cache" / name).read_bytes() == blob


def test_forced_rerun_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    blobs = {p.name: p.read_bytes() for p in (tmp_path / "out" / "cache").glob("*.bin")}
    assert main(["run", "--config", str(cfg), "--quiet", "--force"]) == 0
    assert blobs and all((tmp_path / "out" / "cache" / n).read_bytes() == b
                         for n, b in blobs.items())


def test_invalid_pair_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path, i=1, j=1)
    assert main(["run", "--config", str(cfg)]) == 2
    assert "invalid pair" in capsys.readouterr().err


@pytest.mark.parametrize("bad", ['[kernel]\nkind = "yukawa"', "not toml ["])
def test_malformed_config_exit_2(tmp_path, bad):
    path = tmp_path / "bad.toml"
    path.write_text(bad)
    assert main(["run", "--config", str(path), "--quiet"]) == 2


def test_missing_config_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.toml"), "--quiet"]) == 2


def test_node_cap_exit_2(tmp_path):
    path = write_config(tmp_path)
    path.write_text(path.read_text().replace("nz = 3", "nz = 600"))
    assert main(["run", "--config", str(path), "--quiet"]) == 2


def test_verification_failure_exit_1(tmp_path):
    cfg = write_config(tmp_path, extra="[verify]\ntol = 10.0")
    assert main(["run", "--config", str(cfg), "--quiet"]) == 1
    assert read_report(tmp_path)["overall_pass"] is False


def test_singular_kernel_exit_3(tmp_path):
    path = tmp_path / "singular.toml"
    path.write_text("""
[domain]
shape = "box"
[domain.dimensions]
lx = 1.0
ly = 1.0
lz = 2.0
[domain.resolutions]
nx = 1
ny = 1
nz = 2
[kernel]
kind = "coulomb_z"
epsilon = 0.0
d = 1.0
[output]
report_path = "out/report.json"
cache_dir = "out/cache"
""")
    assert main(["run", "--config", str(path), "--quiet"]) == 3


def test_indefinite_mode_exit_2(tmp_path):
    # the coulomb spectrum has nonnegative modes at the top end
    cfg = write_config(tmp_path, kind="coulomb_z", mode="weak", i=0, j=23, k=2)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 2


# -- stages ----------------------------------------------------------------

def test_eig_before_assemble_exit_4(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["domain", "--config", str(cfg), "--quiet"]) == 0
    assert main(["eig", "--config", str(cfg)]) == 4
    assert "'assemble' stage first" in capsys.readouterr().err


def test_stage_chain_and_cache_hit(tmp_path):
    cfg = write_config(tmp_path)
    cache_dir = tmp_path / "out" / "cache"
    for stage in ("domain", "assemble"):
        assert main([stage, "--config", str(cfg), "--quiet"]) == 0
    assert json.loads((cache_dir / "assemble.json").read_text())["cache_hit"] is False
    assert main(["assemble", "--config", str(cfg), "--quiet"]) == 0
    assert json.loads((cache_dir / "assemble.json").read_text())["cache_hit"] is True
    assert main(["run", "--stage", "eig", "--config", str(cfg), "--quiet"]) == 0


def test_weak_synth_then_verify(tmp_path):
    cfg = write_config(tmp_path)
    for stage in ("domain", "assemble", "eig"):
        assert main([stage, "--config", str(cfg), "--quiet"]) == 0
    assert main(["synth", "--config", str(cfg), "--mode", "weak", "--quiet"]) == 0
    assert main(["verify", "--config", str(cfg), "--mode", "weak", "--quiet"]) == 0
    report = read_report(tmp_path)
    assert report["verification"]["mode"] == "weak"
    jsonschema.validate(report, SCHEMA)
    _, _, members = read_quadruple_csv(tmp_path / "out" / "quadruple.csv")
    phi, Phi = members[0], members[1]
    np.testing.assert_array_equal(Phi, -phi)


def test_stale_config_recomputes(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    cfg.write_text(cfg.read_text().replace("sigma = 0.5", "sigma = 0.6"))
    assert main(["eig", "--config", str(cfg), "--quiet"]) == 4
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    assert read_report(tmp_path)["config"]["kernel"]["sigma"] == 0.6


def test_cache_dir_env_override(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    elsewhere = tmp_path / "elsewhere"
    monkeypatch.setenv("COMPLCHARGE_CACHE_DIR", str(elsewhere))
    assert main(["domain", "--config", str(cfg), "--quiet"]) == 0
    assert (elsewhere / "domain.bin").exists()
    assert not (tmp_path / "out" / "cache" / "domain.bin").exists()


def test_scan_stage(tmp_path):
    extra = """[verify.pose_scan]
r1 = [0.0, 0.0, 1]
r2 = [-0.25, 0.25, 2]
r3 = [1.2, 1.8, 2]
angle_count = 4
pairs = [["phi", "Phi"]]"""
    cfg = write_config(tmp_path, kind="coulomb_z", k=3, extra=extra)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    report = read_report(tmp_path)
    jsonschema.validate(report, SCHEMA)
    (scan,) = report["pose_scan"]
    assert scan["pair"] == ["phi", "Phi"]
    assert scan["min_I"] <= scan["max_I"]
    assert main(["scan", "--config", str(cfg), "--quiet"]) == 0
    staged = json.loads((tmp_path / "out" / "cache" / "scan.json").read_text())
    assert staged["pose_scan"] == report["pose_scan"]


def test_scan_without_config_exit_2(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    assert main(["scan", "--config", str(cfg), "--quiet"]) == 2


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "complcharge.cli.main", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("complcharge ")


# -- config ----------------------------------------------------------------

def test_shipped_configs_load():
    root = Path(__file__).parents[1] / "configs"
    default = load_config(root / "default.toml")
    assert default.n_nodes == 144
    assert default.kernel_spec().kind == "smooth_gaussian"
    scan = load_config(root / "coulomb_scan.toml")
    assert scan.verify["pose_scan"]["contact_r3"] == 1.2


def test_validate_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        validate({"kernel": {"kind": "coulomb_z", "charge": 2}})
    with pytest.raises(ConfigError):
        validate({"extras": {}})


def test_fingerprint_tracks_relevant_sections():
    a = validate({})
    b = validate({"synthesis": {"i": 3}})
    assert a.fingerprint("domain", "kernel") == b.fingerprint("domain", "kernel")
    assert a.fingerprint("synthesis") != b.fingerprint("synthesis")


# -- cache format ----------------------------------------------------------

def test_cache_layout(tmp_path):
    payload = np.array([1.5, -2.0, math.pi])
    path = cache.write(tmp_path / "x.bin", "eig", "abc", 3, "values", payload, {"s": 1})
    raw = path.read_bytes()
    assert raw[:8] == b"CMPLCHG1"
    length = int.from_bytes(raw[8:16], "little")
    header = json.loads(raw[16:16 + length])
    assert header == {"count": 3, "fingerprint": "abc", "kind": "eig", "layout": "values",
                      "meta": {"s": 1}, "n": 3}
    np.testing.assert_array_equal(np.frombuffer(raw[16 + length:], dtype="<f8"), payload)
    assert cache.read(path, "abc")[1].tobytes() == payload.tobytes()
    assert cache.read(path, "other") is None
    assert cache.read(tmp_path / "absent.bin", "abc") is None


def test_cache_rejects_corruption(tmp_path):
    path = cache.write(tmp_path / "x.bin", "eig", "abc", 1, "values", np.ones(2))
    path.write_bytes(b"BADMAGIC" + path.read_bytes()[8:])
    with pytest.raises(cache.CacheFormatError):
        cache.read(path, "abc")
    path.write_bytes(cache.encode("eig", "abc", 1, "values", np.ones(2))[:-3])
    with pytest.raises(cache.CacheFormatError):
        cache.read(path, "abc")


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(0, 40), elements=st.floats(allow_nan=False)))
def test_cache_round_trip_bitwise(values):
    header, payload = cache.decode(cache.encode("k", "fp", len(values), "v", values))
    assert header["count"] == len(values)
    assert payload.tobytes() == values.tobytes()


# -- CSV export ------------------------------------------------------------

def test_one_node_export_has_two_lines(tmp_path):
    c = build_box(1, 1, 1, 1, 1, 1)
    op = from_matrix([[-1.0, 0.0], [0.0, -0.5]], [1.0, 1.0])
    q = weak_quadruple(decompose(op), 0, 1)
    # truncate to the single node
    q1 = type(q)(*(m[:1] for m in q.members()), meta=q.meta)
    path = export_quadruple(q1, c, tmp_path / "one.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(HEADER) == "x1,x2,x3,w,phi,Phi,psi,Psi"


def test_export_round_trip_bitwise(tmp_path, gauss_es):
    c = build_cylinder(1.0, 1.0, 3, 8, 6)
    q = weak_quadruple(gauss_es, 0, 1)
    nodes, weights, members = read_quadruple_csv(export_quadruple(q, c, tmp_path / "q.csv"))
    assert nodes.tobytes() == c.nodes.tobytes()
    assert weights.tobytes() == c.weights.tobytes()
    assert members.tobytes() == q.as_array().tobytes()
    np.testing.assert_array_equal(members[1], -members[0])
