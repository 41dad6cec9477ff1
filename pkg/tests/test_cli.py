import json

import pandas as pd
import pytest
from click.testing import CliRunner

from laboratorio_operadores_no_locales.cli import lab


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(lab, ["--out", str(tmp_path), *args])

    return invoke


def test_constant_writes_report(run, tmp_path):
    result = run("constant", "--m", "1", "--s", "0.25")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "constant.json").read_text())
    assert report["results"]["bundle"]["c_ms"] == pytest.approx(0.398942, rel=1e-5)
    assert len(report["config_hash"]) == 64


def test_refuses_to_overwrite(run, tmp_path):
    assert run("constant", "--m", "1", "--s", "0.25").exit_code == 0
    again = run("constant", "--m", "1", "--s", "0.25")
    assert again.exit_code != 0
    assert "--overwrite" in again.output
    assert run("--overwrite", "constant", "--m", "1", "--s", "0.25").exit_code == 0


def test_domain_error_is_reported(run):
    result = run("constant", "--m", "1", "--s", "1.5")
    assert result.exit_code != 0
    assert "DomainError" in result.output


def test_verify_passes(run, tmp_path):
    result = run("verify", "chu-vandermonde", "--m", "6")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "verify_chu-vandermonde.csv")
    assert frame["passed"].all()


def test_verify_lemma_id(run, tmp_path):
    result = run("verify", "agaapa0")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "verify_agaapa0.csv")
    assert frame["passed"].all()
    assert frame["measured"].max() < 1e-12


def test_verify_lemma_id_with_colon(run, tmp_path):
    result = run("verify", "lem:constant")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "verify_lem-constant.json").exists()


def test_verify_unknown_id(run):
    result = run("verify", "no-such-check")
    assert result.exit_code != 0
    assert "cosine-identity" in result.output


def test_verify_list(run):
    result = run("verify", "--list")
    assert result.exit_code == 0
    assert "mountain-pass" in result.output
    assert "agaapa0" in result.output


def test_help_is_in_spanish(run):
    result = run("verify", "--help")
    assert result.exit_code == 0
    assert "Ejecuta una batería registrada" in result.output
    assert "Runs a registered" not in result.output


def test_apply_identity_atom(run, tmp_path):
    result = run("apply", "--mu", "delta:0", "--x", "0.1")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "apply.csv")
    assert frame["value"].iloc[0] == pytest.approx(0.9591894571091382, rel=1e-9)


def test_measure_report(run, tmp_path):
    result = run("measure", "--mu", "delta:1 - 0.3*delta:0.5")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "measure.json").read_text())
    assert report["results"]["assumptions"]["gamma"] == pytest.approx(0.3)


def test_table_pathological(run, tmp_path):
    assert run("table", "--kind", "pathological", "--series", "special_phi", "--K", "5").exit_code == 0
    frame = pd.read_csv(tmp_path / "table_pathological.csv")
    assert len(frame) == 5


def test_spectrum_eigenvalues_increase(run, tmp_path):
    result = run("spectrum", "--mu", "delta:0.5", "--nodes", "256", "--k", "4")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "spectrum.json").read_text())
    eigenvalues = report["results"]["eigenvalues"]
    assert eigenvalues == sorted(eigenvalues)
    assert (tmp_path / "eigenvector_4.bin").exists()


def test_solve_linear(run, tmp_path):
    result = run("solve", "--kind", "linear", "--mu", "delta:0.5", "--omega", "interval:0,1", "--nodes", "256")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "solve_linear.json").read_text())
    assert report["results"]["residual"] <= 1e-6
