import csv
import json

import pytest

from mcdiff import cli
from mcdiff.config import ExperimentConfig
from mcdiff.errors import ConfigError, NonPositiveDensity


def small_config(tmp_path, **time):
    cfg = ExperimentConfig.standard().to_dict()
    cfg["grid"]["M"] = 64
    cfg["time"].update({"T_end": 0.01, "snapshot_times": [0.0, 0.005, 0.01]}, **time)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig.standard()
        again = ExperimentConfig.from_dict(json.loads(cfg.dumps()))
        assert again.to_dict() == cfg.to_dict()

    def test_standard_values(self):
        cfg = ExperimentConfig.standard()
        assert cfg.grid["M"] == 1024 and cfg.time["T_end"] == 0.05
        assert cfg.sweep["eps_list"] == [0.02, 0.01, 0.005, 0.0025]
        assert cfg.mixture["sigma"] == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]

    def test_malformed_json_position(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "mixture": {,\n}')
        with pytest.raises(ConfigError, match="line 2"):
            ExperimentConfig.load(p)

    @pytest.mark.parametrize("section,key,value", [
        ("grid", "M", 8), ("time", "cfl", 1.5), ("mixture", "epsilon", -1.0),
        ("sweep", "eps_list", [0.01, 0.02, 0.005]), ("check", "samples", 10),
        ("initial", "amplitudes", [2.0, 0.0, 0.0]),
    ])
    def test_invalid_values(self, section, key, value):
        d = ExperimentConfig.standard().to_dict()
        d[section][key] = value
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(d)

    def test_unknown_section(self):
        d = ExperimentConfig.standard().to_dict()
        d["extra"] = {}
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(d)


def test_check_default(tmp_path, capsys):
    assert cli.main(["check", "--out", str(tmp_path)]) == cli.EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"] and rep["samples"] == 100
    assert "PASS" in capsys.readouterr().out


def test_malformed_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{ not json")
    assert cli.main(["check", "--config", str(p), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err


def test_negative_sigma_config_exit_code(tmp_path):
    d = ExperimentConfig.standard().to_dict()
    d["mixture"]["sigma"][0][1] = d["mixture"]["sigma"][1][0] = -1.0
    p = tmp_path / "neg.json"
    p.write_text(json.dumps(d))
    assert cli.main(["check", "--config", str(p), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("model", ["relaxation", "limit"])
def test_simulate_writes_deterministic_snapshots(tmp_path, model):
    cfg = small_config(tmp_path)
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert cli.main(["simulate", "--model", model, "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == [f"{model}_t0.000000.csv", f"{model}_t0.005000.csv", f"{model}_t0.010000.csv"]
    for n in names:
        assert (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()
    header = (outs[0] / names[0]).read_text().splitlines()[0].split(",")
    expected = ["x", "rho", "momentum", "rho_1", "rho_2"]
    assert header == (expected + ["J_1", "J_2"] if model == "relaxation" else expected)


def test_sweep_small_grid(tmp_path):
    cfg = small_config(tmp_path)
    code = cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--threads", "2"])
    assert code in (cli.EXIT_OK, cli.EXIT_CRITERIA)
    with (tmp_path / "sweep.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["epsilon", "error", "fitted_order_running"]
    assert len(rows) == 5
    assert rows[1][2] == "nan" and rows[2][2] == "nan" and rows[3][2] != "nan"
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"] == (code == cli.EXIT_OK)


def test_lam_compare(tmp_path):
    assert cli.main(["lam-compare", "--out", str(tmp_path)]) == cli.EXIT_OK
    rep = json.loads((tmp_path / "lam_compare.json").read_text())
    assert rep["force_identity_residual"] <= 1e-12 and rep["lam_D_omega_spread"] > 1e-8


def test_runtime_abort_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NonPositiveDensity("lost positivity", cell=3)

    monkeypatch.setattr(cli.relaxation, "advance", boom)
    cfg = small_config(tmp_path)
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_RUNTIME


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "mcdiff", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "lam-compare" in res.stdout


def test_sweep_standard_test(tmp_path):
    assert cli.main(["sweep", "--out", str(tmp_path)]) == cli.EXIT_OK
    with (tmp_path / "sweep.csv").open() as fh:
        rows = list(csv.reader(fh))[1:]
    assert [float(r[0]) for r in rows] == [0.02, 0.01, 0.005, 0.0025]
    errors = [float(r[1]) for r in rows]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    rep = json.loads((tmp_path / "report.json").read_text())
    assert 1.6 <= rep["fitted_order"] <= 2.4 and rep["pass"]
