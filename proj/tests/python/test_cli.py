"""End-to-end checks of the command line runner: exit-code contract,
report determinism, and the describe summary."""

import json
import os
import pathlib
import subprocess

import pytest

CLI = os.environ.get("RDSLAB_CLI")
CONFIGS = pathlib.Path(os.environ.get("RDSLAB_CONFIGS", "configs"))

pytestmark = pytest.mark.skipif(CLI is None, reason="RDSLAB_CLI not set")


def run_cli(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def test_describe_doubling(tmp_path):
    proc = run_cli("describe", "--config", str(CONFIGS / "doubling_iid.json"))
    assert proc.returncode == 0
    assert "[iid]" in proc.stdout
    assert "s^2" in proc.stdout


def test_describe_flags_degenerate_observable():
    proc = run_cli("describe", "--config", str(CONFIGS / "coboundary_m3.json"))
    assert proc.returncode == 0
    assert "degenerate" in proc.stdout


def test_describe_vector_prints_eigenvalues():
    proc = run_cli("describe", "--config", str(CONFIGS / "vector3_m3.json"))
    assert proc.returncode == 0
    assert "Sigma^2 eigenvalues" in proc.stdout


def test_invalid_resolution_exits_1(tmp_path):
    config = json.loads((CONFIGS / "markov_m3.json").read_text())
    config["resolution"] = 4  # not a multiple of M = 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(config))
    proc = run_cli("describe", "--config", str(bad))
    assert proc.returncode == 1
    assert "multiple of M" in proc.stderr


def test_variance_run_writes_report(tmp_path):
    out = tmp_path / "r"
    proc = run_cli("variance", "--config", str(CONFIGS / "markov_m3.json"), "--out", str(out))
    assert proc.returncode == 0, proc.stdout + proc.stderr
    report = json.loads((out / "report.json").read_text())
    tests = {v["test"] for v in report["verdicts"]}
    assert "variance.l3" in tests
    assert (out / "correlations.csv").exists()


def test_reports_identical_modulo_timings(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        proc = run_cli("mix-coeffs", "--config", str(CONFIGS / "markov_m3.json"),
                       "--out", str(out), "--seed", "7")
        assert proc.returncode == 0
    r1 = json.loads((out1 / "report.json").read_text())
    r2 = json.loads((out2 / "report.json").read_text())
    r1.pop("timings")
    r2.pop("timings")
    assert r1 == r2


def test_degenerate_observable_fails_distributional_run(tmp_path):
    proc = run_cli("clt", "--config", str(CONFIGS / "coboundary_m3.json"),
                   "--out", str(tmp_path / "r"))
    assert proc.returncode == 1
    assert "ZeroVariance" in proc.stderr
