import csv
import json
import logging
import subprocess
import sys

import pytest
import yaml

from nonlocal_semilinear.cli import SCHEMA_VERSION, main, resolve_config, run


def write_config(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


SMALL = {"grid": {"n": 96}}


def test_solve_with_zero_lambda(tmp_path):
    cfg = write_config(tmp_path, {**SMALL, "problem": {"lambda": 0}})
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 0
    report = json.loads((tmp_path / "o" / "solve.json").read_text())
    assert report["schema_version"] == SCHEMA_VERSION
    assert report["result"]["status"] == "converged"
    assert report["result"]["norms"]["Linf"] == 0.0
    assert all(float(r["u"]) == 0.0 for r in read_csv(tmp_path / "o" / "solution.csv"))


def test_invalid_parameters_exit_2(tmp_path, caplog):
    cfg = write_config(tmp_path, {"operator": {"s": 0.6}})
    with caplog.at_level(logging.ERROR):
        assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "assumption violated" in caplog.text and "N > 2s" in caplog.text


def test_unknown_key_exits_2(tmp_path):
    cfg = write_config(tmp_path, {"grid": {"nodes": 10}})
    assert main(["solve", cfg]) == 2


def test_unknown_command_exits_64(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", cfg])
    assert exc.value.code == 64
    assert run(resolve_config(SMALL), "frobnicate", tmp_path) == 64


def test_diverged_solve_exits_3(tmp_path):
    cfg = write_config(tmp_path, {**SMALL, "problem": {"lambda": 50.0}})
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 3
    report = json.loads((tmp_path / "o" / "solve.json").read_text())
    assert report["result"]["status"] == "diverged"


def test_bifurcation_with_quadratic_source(tmp_path):
    cfg = write_config(tmp_path, {"grid": {"n": 128}, "problem": {"p": 2.0}})
    assert main(["bifurcation", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "branch.csv")
    assert len(rows) == 5
    for r in rows:
        assert float(r["norm_second"]) > float(r["norm_minimal"]) > 0


@pytest.mark.parametrize("command", ["verify-kernel", "solve", "lambda-star", "eigen", "nonexist"])
def test_outputs_are_reproducible_and_carry_headers(tmp_path, command):
    cfg = write_config(tmp_path, {**SMALL, "verify": {"samples": 500}, "seed": 3})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([command, cfg, "--out", str(a)]) == 0
    assert main([command, cfg, "--out", str(b)]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files and files == sorted(p.name for p in b.iterdir())
    for name in files:
        raw = (a / name).read_bytes()
        assert raw == (b / name).read_bytes()
        text = raw.decode()
        if name.endswith(".csv"):
            assert text.startswith(f"# schema_version: {SCHEMA_VERSION}\n")
            conf = json.loads(text.splitlines()[2][len("# config: "):])
        else:
            doc = json.loads(text)
            assert doc["schema_version"] == SCHEMA_VERSION
            conf = doc["config"]
        assert conf["seed"] == 3 and conf["grid"]["n"] == 96
        assert conf["operator"] == {"family": "RFL", "s": 0.25, "truncation": None}


def test_nonexist_table(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    assert main(["nonexist", cfg, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "nonexistence.csv")
    assert list(rows[0]) == ["p", "delta_y", "integral", "solve_status"]
    assert len(rows) == 6


def test_dimension_condition_warning(tmp_path, caplog):
    cfg = write_config(tmp_path, {**SMALL, "operator": {"s": 0.3}, "eigen": {"k": 1, "lambda_fractions": [0.5]}})
    with caplog.at_level(logging.WARNING):
        assert main(["eigen", cfg, "--out", str(tmp_path)]) == 0
    assert "dimension condition not satisfied" in caplog.text


def test_sfl_config(tmp_path):
    cfg = write_config(tmp_path, {**SMALL, "operator": {"family": "SFL", "s": 0.25},
                                  "problem": {"p": 1.2}})
    assert main(["lambda-star", cfg, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "lambda_star.json").read_text())
    assert doc["result"]["lambda_star"] > 0
    assert doc["result"]["p_star"] == pytest.approx(4 / 3)


def test_json_config_and_module_entry_point(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**SMALL, "problem": {"lambda": 0.01}}))
    proc = subprocess.run([sys.executable, "-m", "nonlocal_semilinear", "solve", str(path),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "trace.csv").exists()


def test_output_format_selection(tmp_path):
    cfg = write_config(tmp_path, {**SMALL, "problem": {"lambda": 0.01}, "output": {"formats": "json"}})
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 0
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["solve.json"]
    bad = write_config(tmp_path, {"output": {"formats": ["xml"]}}, "bad.yaml")
    assert main(["solve", bad]) == 2


def test_ball_domain_config(tmp_path):
    cfg = write_config(tmp_path, {
        "domain": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0, "N": 2},
        "operator": {"s": 0.75},
        "grid": {"n": 8, "n_angular": 8},
        "problem": {"mu": {"atoms": [{"x": [0.0, 0.0], "mass": 1.0}]}},
        "eigen": {"k": 3, "lambda_fractions": [0.5]},
    })
    assert main(["eigen", cfg, "--out", str(tmp_path / "o")]) == 0
    values = json.loads((tmp_path / "o" / "eigen.json").read_text())["result"]["values"]
    assert values == sorted(values)


def test_scalar_atom_on_ball_exits_2(tmp_path):
    cfg = write_config(tmp_path, {"domain": {"kind": "ball", "center": [0.0, 0.0], "N": 2},
                                  "operator": {"s": 0.75}, "grid": {"n": 8}})
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 2
