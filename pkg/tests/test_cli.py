import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from doublephase.cli import default_config, run


def write_config(path, res=9, drop=(), **changes):
    cfg = default_config()
    cfg["domain"]["resolution"] = res
    cfg["ensemble"]["count"] = 20
    cfg["probe"]["samples"] = 10
    for key in drop:
        cfg.pop(key)
    for key, value in changes.items():
        if isinstance(value, dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    path.write_text(json.dumps(cfg))
    return str(path)


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def assert_manifest_complete(out):
    m = manifest(out)
    on_disk = sorted(p.name for p in out.iterdir() if p.name != "manifest.json")
    assert m["files"] == on_disk
    assert list(out.glob("manifest*")) == [out / "manifest.json"]


@pytest.mark.parametrize("sub,files", [
    ("grid-info", ["grid_info.json"]),
    ("verify-ckn", ["ckn_members.csv", "ckn_report.json"]),
    ("embed", ["embedding_members.csv", "embedding_report.json"]),
    ("probe", ["geometry.json", "mountain.csv", "valley.csv"]),
    ("sweep", ["sweep.json", "sweep_table.csv"]),
])
def test_subcommands_write_artifacts(tmp_path, sub, files):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.json", lambdas=[0.5, 1.0])
    assert run([sub, "--config", cfg, "--out", str(out)]) == 0
    assert manifest(out)["files"] == files
    assert manifest(out)["subcommand"] == sub
    assert_manifest_complete(out)


def test_grid_info_default_config(tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["grid-info", "--out", str(out)]) == 0
    info = json.loads((out / "grid_info.json").read_text())
    assert info["nodes"] == 4913
    assert info["weight_sum"] == pytest.approx(8.0)
    assert info["admissibility"]["passed"]
    assert "nodes: 4913" in capsys.readouterr().out


def test_solve_default_config(tmp_path):
    out = tmp_path / "out"
    assert run(["solve", "--out", str(out)]) == 0
    rep = json.loads((out / "solve_report.json").read_text())
    assert rep["certified"] and rep["m_inf"] < 0
    assert manifest(out)["files"] == ["solution.csv", "solve_report.json"]
    assert_manifest_complete(out)


def test_solution_csv_layout(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.json")
    assert run(["solve", "--config", cfg, "--out", str(out)]) == 0
    raw = (out / "solution.csv").read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["x1", "y1", "y2", "value"]
    body = np.array(rows[1:], dtype=float)
    assert body.shape == (9 ** 3, 4)
    # lexicographic node order: the last axis varies fastest
    assert body[1, 2] > body[0, 2] and body[0, 0] == body[1, 0]
    # 17 significant digits round-trip the doubles exactly
    for text in (r[3] for r in rows[1:]):
        assert format(float(text), ".17g") == text


def test_json_output_format(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.json", output={"format": "json"})
    assert run(["embed", "--config", cfg, "--out", str(out)]) == 0
    rows = json.loads((out / "embedding_members.json").read_text())
    assert len(rows) == 20 and set(rows[0]) == {"index", "ratio"}


def test_verify_ckn_without_s(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.json", drop=("s", "lambda", "lambdas"))
    assert run(["verify-ckn", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads((out / "ckn_report.json").read_text())
    assert rep["violation_count"] == 0


def test_verify_ckn_scan_mode(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.json", ckn={"scan": True})
    assert run(["verify-ckn", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads((out / "ckn_report.json").read_text())
    assert rep["constants"]["eps"] != pytest.approx(rep["constants"]["eps_bound"] / 2)


def test_solve_gamma_above_embedding_bound(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.json", res=17, gamma=2.8)
    assert run(["solve", "--config", cfg, "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "embedding bound 0 < gamma < N(G- - s)/s" in err
    assert not (out / "solve_report.json").exists()


def test_solve_missing_s_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", drop=("s",))
    assert run(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "missing s" in capsys.readouterr().err


@pytest.mark.parametrize("changes,needle", [
    ({"exponent": "2.5+sin("}, "offset"),
    ({"exponent": "2.5+z1"}, "z1"),
    ({"domain": {"n": 1, "m": 1, "bounds": [[-1, 1], [-1, 1]], "resolution": 9}}, "N = n + m"),
])
def test_bad_configs_exit_one(tmp_path, capsys, changes, needle):
    cfg = write_config(tmp_path / "c.json", **changes)
    assert run(["grid-info", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert needle in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    assert run(["grid-info", "--config", str(tmp_path / "none.json"),
                "--out", str(tmp_path / "o")]) == 1


def test_seed_and_resolution_overrides(tmp_path):
    out = tmp_path / "out"
    assert run(["grid-info", "--out", str(out), "--seed", "7", "--resolution", "9"]) == 0
    m = manifest(out)
    assert m["seed"] == 7 and m["config"]["ensemble"]["seed"] == 7
    assert json.loads((out / "grid_info.json").read_text())["nodes"] == 729


def test_solve_is_byte_deterministic(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert run(["solve", "--out", str(out)]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "doublephase", "grid-info", "--resolution", "9",
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "manifest.json").exists()
