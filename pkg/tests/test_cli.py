import json
import subprocess
import sys

import pytest

from starmeasure.cli import main

from conftest import CONFIGS, DATA, SHIPPED


def run(*args):
    return main([str(a) for a in args])


def test_solve_binary_beta(tmp_path, capsys):
    assert run("solve", "--config", CONFIGS / "binary_beta.cfg", "--out", tmp_path) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["measure.csv", "render.pgm", "report.json", "trace.csv"]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "converged" and report["final_residual"] == 0.0
    assert report["contraction"]["verdict"] == "contractive"
    assert report["engine"]["version"]
    assert "timings" in report
    assert "converged" in capsys.readouterr().out


def test_identity_check_and_solve(tmp_path, capsys):
    cfg = DATA / "identity.cfg"
    assert run("check", "--config", cfg, "--out", tmp_path) == 0
    assert "verdict: not contractive" in capsys.readouterr().out
    assert json.loads((tmp_path / "check.json").read_text())["contraction"]["verdict"] == "not contractive"
    assert run("solve", "--config", cfg, "--out", tmp_path / "s") == 2
    assert run("solve", "--config", cfg, "--out", tmp_path / "f", "--force") == 0


def test_nonconvergence_exit_code(tmp_path):
    cfg = tmp_path / "short.cfg"
    cfg.write_text((CONFIGS / "sym2_product.cfg").read_text() + "solver:\n  max_iter: 1\n  epsilon: 1.0e-9\n")
    assert run("solve", "--config", cfg, "--out", tmp_path / "o") == 3
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["status"] == "max_iter_exhausted" and report["iterations"] == 1
    assert (tmp_path / "o" / "trace.csv").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text((CONFIGS / "binary_beta.cfg").read_text().replace("[1.0, 0.5]", "[0.9, 0.5]"))
    assert run("check", "--config", bad) == 2
    assert "max weight must equal 1" in capsys.readouterr().err
    bad.write_text("space: [unclosed")
    assert run("check", "--config", bad) == 2
    assert run("solve", "--config", CONFIGS / "binary_beta.cfg", "--threads", "0") == 2


def test_io_error_exit_4(tmp_path):
    assert run("solve", "--config", tmp_path / "missing.cfg") == 4
    assert run("render", "--config", CONFIGS / "binary_beta.cfg", "--measure", tmp_path / "none.csv") == 4


def test_attractor_and_render(tmp_path):
    assert run("attractor", "--config", CONFIGS / "binary_beta.cfg", "--out", tmp_path) == 0
    lines = (tmp_path / "attractor.csv").read_text().splitlines()
    assert lines[0] == "point_index,x0" and len(lines) == 1026
    assert run("solve", "--config", CONFIGS / "binary_beta.cfg", "--out", tmp_path / "s") == 0
    out = tmp_path / "again.pgm"
    assert run("render", "--config", CONFIGS / "binary_beta.cfg", "--measure", tmp_path / "s" / "measure.csv",
               "--out", out) == 0
    assert out.read_bytes() == (tmp_path / "s" / "render.pgm").read_bytes()


def test_oracle_subcommand(tmp_path, capsys):
    assert run("oracle", "--suite", "projection", "--out", tmp_path) == 0
    payload = json.loads((tmp_path / "oracle.json").read_text())
    assert payload["violations"] == 0 and payload["instances"] > 0


def test_seed_override_lands_in_report(tmp_path):
    assert run("solve", "--config", CONFIGS / "binary_beta.cfg", "--out", tmp_path, "--seed", "9") == 0
    assert json.loads((tmp_path / "report.json").read_text())["contraction"]["seed"] == 9


def test_no_timings_gives_stable_reports(tmp_path):
    for d in ("a", "b"):
        assert run("solve", "--config", CONFIGS / "sym2_product.cfg", "--out", tmp_path / d, "--no-timings") == 0
    for name in ("measure.csv", "trace.csv", "report.json", "render.pgm"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.name)
def test_shipped_configs_check_and_solve(path, tmp_path):
    assert run("check", "--config", path) == 0
    assert run("solve", "--config", path, "--out", tmp_path) == 0


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "starmeasure.cli", "check", "--config", str(CONFIGS / "binary_beta.cfg")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "verdict: contractive" in proc.stdout
