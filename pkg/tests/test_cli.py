import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from rakeroom.cli import cli

SCENARIO = {
    "schema_version": 1,
    "room": {"width": 4.0, "height": 6.0, "max_order": 2},
    "array": {"layout": "linear", "center": [2.0, 1.5], "M": 6, "spacing": 0.08},
    "source": {"position": [1.0, 4.5], "duration": 1.0},
    "interferer": {"position": [3.0, 3.0], "duration": 1.0},
    "design": {"name": "rake-max-sinr", "K": 3, "K_prime": 3},
    "stft": {"frame_length": 512},
    "experiment": {"trials": 10, "K_values": [0, 2]},
    "seed": 4,
}


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(SCENARIO))
    return path


def test_unknown_subcommand(capsys):
    assert cli(["frobnicate"]) == 2
    assert "invalid choice" in capsys.readouterr().err


def test_missing_argument(capsys):
    assert cli(["simulate"]) == 2
    assert "error" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path, capsys):
    bad = dict(SCENARIO, source={"position": [9.0, 1.0]})
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(bad))
    assert cli(["simulate", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "source position" in capsys.readouterr().err


def test_runtime_error_exit_code(tmp_path, capsys):
    sc = dict(SCENARIO, source={"position": [1.0, 4.5], "wav": "missing.wav"})
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(sc))
    assert cli(["simulate", str(path), "--out-dir", str(tmp_path / "o")]) == 1
    assert "missing.wav" in capsys.readouterr().err


def test_simulate(scenario, tmp_path):
    assert cli(["simulate", str(scenario), "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "mics.wav").exists()


def test_design_json(scenario, tmp_path):
    assert cli(["design", str(scenario), "--design", "max-sinr", "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "weights_max-sinr.json").read_text())
    assert doc["design"] == "max-sinr" and doc["K"] == 0
    assert len(doc["weights"]) == len(doc["frequencies_hz"]) == 513
    assert all(len(row) == 6 and all(len(c) == 2 for c in row) for row in doc["weights"])


def test_beampattern_csv(scenario, tmp_path):
    assert cli(["beampattern", str(scenario), "--design", "rake-max-sinr", "--freq", "1000",
                "--out-dir", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "beampattern_rake-max-sinr_1000Hz.csv")))
    assert rows[0] == ["angle_deg", "magnitude"]
    assert len(rows) == 361
    assert max(float(r[1]) for r in rows[1:]) == pytest.approx(1.0)


def test_experiment_from_scenario_and_seed(scenario, tmp_path):
    args = ["experiment", "sinr-vs-k", str(scenario), "--trials", "6"]
    assert cli(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert cli(args + ["--out-dir", str(tmp_path / "b")]) == 0
    assert cli(args + ["--seed", "5", "--out-dir", str(tmp_path / "c")]) == 0
    a, b, c = ((tmp_path / d / "sinr_vs_k.csv").read_bytes() for d in "abc")
    assert a == b and a != c
    prov = json.loads((tmp_path / "a" / "sinr_vs_k_provenance.json").read_text())
    assert prov["seed"] == 4 and prov["num_trials"] == 6


def test_experiment_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RAKEROOM_SEED", "17")
    assert cli(["experiment", "snr-gain", "--trials", "5", "--k", "2", "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "snr_gain_provenance.json").read_text())["seed"] == 17


def test_experiment_rejects_bad_trials(tmp_path):
    assert cli(["experiment", "snr-gain", "--trials", "0", "--out-dir", str(tmp_path)]) == 2


def test_process(scenario, tmp_path):
    assert cli(["process", str(scenario), "--design", "rake-max-udr", "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["design"] == "rake-max-udr"
    assert set(summary["output_sinr_db"]) == {"rake-max-udr", "max-sinr"}


def test_console_module(tmp_path):
    out = subprocess.run([sys.executable, "-m", "rakeroom", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "rakeroom" in out.stdout
