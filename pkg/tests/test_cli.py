"""End-to-end command line checks via subprocess."""

import csv
import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

CMD = [sys.executable, "-m", "buls"]


def run(*args, **kw):
    env = dict(os.environ, BULS_THREADS="2")
    return subprocess.run(
        CMD + list(args), capture_output=True, text=True, env=env, **kw
    )


def read_rows(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def test_describe_table_and_json():
    out = run("describe", "--data", "uefa")
    assert out.returncode == 0
    assert "49.24" in out.stdout and "w1" in out.stdout
    out = run("describe", "--data", "uefa", "--json")
    payload = json.loads(out.stdout)
    assert payload["w1"]["n"] == 37
    assert payload["w2"]["mean"] == pytest.approx(0.365, abs=5e-3)


def test_fit_json_reproduces_reference_model():
    out = run("fit", "--data", "uefa", "--model", "normal")
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert payload["gen"]["kind"] == "normal"
    assert payload["loglik"] == pytest.approx(-36.693, abs=0.02)
    assert payload["aic"] == pytest.approx(83.386, abs=0.05)
    assert payload["bic"] == pytest.approx(91.441, abs=0.05)
    assert payload["converged"] is True
    assert payload["theta_hat"]["rho"] == pytest.approx(0.4956, abs=1e-3)
    # the human-readable table goes to stderr
    assert "eta1" in out.stderr


def test_fit_reports_nonconvergence_with_exit_four():
    out = run("fit", "--data", "uefa", "--model", "laplace")
    assert out.returncode == 4
    payload = json.loads(out.stdout)
    assert payload["converged"] is False
    assert "did not converge" in out.stderr


def test_fit_all_ranks_gaussian_first_on_fifa():
    out = run("fit-all", "--data", "fifa", "--shape-grid", "6..10", "--json")
    assert out.returncode == 0
    ranking = json.loads(out.stdout)
    converged = [r for r in ranking if r["converged"]]
    assert converged[0]["gen"]["kind"] == "normal"
    aics = [r["aic"] for r in converged]
    assert aics == sorted(aics)


def test_simulate_roundtrip_through_fit(tmp_path):
    csv_path = tmp_path / "sim.csv"
    out = run(
        "simulate", "--model", "student", "--shape", "5",
        "--eta1", "1.0", "--eta2", "1.0", "--sigma1", "0.7",
        "--sigma2", "0.7", "--rho", "0.4", "-n", "400",
        "--seed", "9", "--out", str(csv_path),
    )
    assert out.returncode == 0
    header, rows = read_rows(csv_path)
    assert header == ["w1", "w2"] and len(rows) == 400
    refit = run("fit", "--data", str(csv_path), "--model", "student", "--shape", "5")
    assert refit.returncode == 0
    payload = json.loads(refit.stdout)
    assert payload["theta_hat"]["rho"] == pytest.approx(0.4, abs=0.15)


def test_simulate_rejects_bad_arguments():
    base = [
        "simulate", "--model", "normal", "--eta1", "1", "--eta2", "1",
        "--sigma1", "0.5", "--sigma2", "0.5",
    ]
    out = run(*base, "--rho", "0.2", "-n", "0")
    assert out.returncode == 2
    out = run(*base, "--rho", "1.5", "-n", "10")
    assert out.returncode == 2


def test_qq_writes_csv_svg_and_png(tmp_path):
    csv_path = tmp_path / "qq.csv"
    svg_path = tmp_path / "qq.svg"
    png_path = tmp_path / "qq.png"
    out = run(
        "qq", "--data", "uefa", "--model", "normal",
        "--out", str(csv_path), "--svg", str(svg_path), "--plot", str(png_path),
    )
    assert out.returncode == 0
    header, rows = read_rows(csv_path)
    assert header == ["theoretical", "empirical"] and len(rows) == 37
    vals = [(float(a), float(b)) for a, b in rows]
    assert vals == sorted(vals)

    root = ET.parse(svg_path).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f".//{ns}circle")) == 37
    assert len(root.findall(f".//{ns}line")) == 1
    assert png_path.stat().st_size > 1000


def test_mc_study_csv_and_plot(tmp_path):
    cfg = {
        "model": "normal",
        "theta": {"eta1": 1, "eta2": 1, "sigma1": 0.5, "sigma2": 0.5, "rho": 0.5},
        "sample_sizes": [40],
        "replications": 8,
        "seed": 3,
    }
    cfg_path = tmp_path / "study.json"
    cfg_path.write_text(json.dumps(cfg))
    out_path = tmp_path / "report.csv"
    png_path = tmp_path / "report.png"
    out = run(
        "mc-study", "--config", str(cfg_path),
        "--out", str(out_path), "--plot", str(png_path),
    )
    assert out.returncode == 0
    header, rows = read_rows(out_path)
    assert header == ["n", "parameter", "bias", "rmse", "cp", "cp_se", "failure_rate"]
    assert len(rows) == 5
    assert png_path.stat().st_size > 1000


def test_datasets_export(tmp_path):
    out = run("datasets", "--export", str(tmp_path))
    assert out.returncode == 0
    header, rows = read_rows(tmp_path / "uefa.csv")
    assert header == ["w1", "w2"] and len(rows) == 37
    assert float(rows[0][0]) == pytest.approx(0.289, abs=5e-4)
    assert float(rows[0][1]) == pytest.approx(0.222, abs=5e-4)
    assert float(rows[-1][0]) == pytest.approx(0.311, abs=5e-4)
    header, rows = read_rows(tmp_path / "fifa.csv")
    assert header == ["w1", "w2"] and len(rows) == 32
    assert float(rows[0][0]) == pytest.approx(0.888, abs=5e-4)
    assert float(rows[-1][1]) == pytest.approx(0.594, abs=5e-4)


def test_data_errors_exit_three(tmp_path):
    out = run("describe", "--data", str(tmp_path / "missing.csv"))
    assert out.returncode == 3

    bad_header = tmp_path / "bad_header.csv"
    bad_header.write_text("a,b\n0.1,0.2\n")
    out = run("describe", "--data", str(bad_header))
    assert out.returncode == 3
    assert "header" in out.stderr.lower()

    bad_value = tmp_path / "bad_value.csv"
    bad_value.write_text("w1,w2\n0.1,0.2\n1.2,0.3\n")
    out = run("describe", "--data", str(bad_value))
    assert out.returncode == 3
    assert ":3:" in out.stderr


def test_usage_errors_exit_two():
    out = run("fit", "--data", "uefa", "--model", "normal", "--bogus")
    assert out.returncode == 2
    out = run("fit", "--data", "uefa", "--model", "cauchy")
    assert out.returncode == 2
