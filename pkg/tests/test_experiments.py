import csv
import io
import json

import numpy as np
import pytest

from dualschur import GammaOutOfRange, IllPosedForwardEuler
from dualschur.cli import main
from dualschur.experiments import CsvTable, ExperimentConfig, run


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_config_defaults_and_validation():
    cfg = ExperimentConfig("split-dof")
    assert (cfg.method, cfg.gamma, cfg.dt, cfg.n_steps) == ("d", 0.25, 0.01, 70)
    with pytest.raises(IllPosedForwardEuler):
        ExperimentConfig("split-dof", gamma=0.0)
    with pytest.raises(ValueError):
        ExperimentConfig("nope")
    with pytest.raises(ValueError):
        ExperimentConfig("split-dof", dt=0.03, t_end=0.7001)
    with pytest.raises(ValueError):
        ExperimentConfig("baumgarte", alpha=-1.0)
    with pytest.raises(GammaOutOfRange):
        ExperimentConfig("counterexample", gamma=0.7)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("DDSOLVE_SEED", "77")
    assert ExperimentConfig("baumgarte").seed == 77


def test_table_rectangular_and_formatting():
    t = CsvTable(["a", "b", "c"])
    t.append([1, 0.1, True])
    with pytest.raises(ValueError):
        t.append([1, 2])
    assert t.to_csv() == "a,b,c\n1,0.10000000000000001,true\n"


def test_split_dof_csv_is_deterministic_and_roundtrips():
    a = run(ExperimentConfig("split-dof", gamma=0.75))
    b = run(ExperimentConfig("split-dof", gamma=0.75))
    text = a.to_csv()
    assert text == b.to_csv()
    parsed = rows(text)
    assert len({len(r) for r in parsed}) == 1
    col = parsed[0].index("lambda")
    assert [float(r[col]) for r in parsed[1:]] == a.column("lambda").tolist()


def test_divergence_reported_in_band():
    t = run(ExperimentConfig("heat1d", gamma=0.25, dt=1e-5, t_end=0.01))
    assert t.summary["verdict"] == "diverged"
    assert t.rows[-1][-1] is True
    assert all(r[-1] is False for r in t.rows[:-1])


def test_heat1d_matches_analytic():
    t = run(ExperimentConfig("heat1d", gamma=0.75, dt=1e-3, t_end=0.5, snapshots=(0.05, 0.5)))
    assert t.summary["verdict"] == "bounded"
    assert np.max(t.column("l2_error_d")) < 1e-2
    snaps = t.extra["snapshots"]
    assert len(snaps.rows) == 2 * 21
    u, ue = snaps.column("u"), snaps.column("u_exact")
    assert np.max(np.abs(u - ue)) < 1e-2


def test_heat2d_modified_snapshots():
    t = run(ExperimentConfig("heat2d", t_end=0.05, snapshots=(0.05,), mesh=10))
    snaps = t.extra["snapshots"]
    assert snaps.header[:3] == ["t", "x", "y"]
    assert len(snaps.rows) == 21 * 21
    assert t.summary["final_l2_error_d"] < 1e-2


def test_convergence_zero_steps_is_interpolation_rate():
    t = run(ExperimentConfig("converge", t_end=0.0, levels=(10, 20, 40)))
    assert t.summary["rate_d"] == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("gamma, ratio", [(0.25, 3.0), (0.4, 1.5)])
def test_counterexample_growth(gamma, ratio):
    t = run(ExperimentConfig("counterexample", gamma=gamma, n_terms=60))
    assert t.summary["growth_ratio"] == pytest.approx(ratio, rel=1e-6)


def test_baumgarte_reports_bounds():
    t = run(ExperimentConfig("baumgarte", t_end=0.01))
    assert t.summary["alpha_max"] == 2.5
    assert t.summary["omega_max"][0] == pytest.approx(1200.0, abs=0.1)
    assert t.summary["baumgarte_critical_dt"][0] == pytest.approx(1.25e-3, rel=1e-6)


def test_cli_summary_and_exit_codes(capsys, tmp_path):
    assert main(["counterexample", "--summary"]) == 0
    line = json.loads(capsys.readouterr().out.strip())
    assert line["max_abs_s"] == 8.0
    assert main(["split-dof", "--gamma", "0"]) != 0
    out = tmp_path / "sd.csv"
    assert main(["split-dof", "--out", str(out)]) == 0
    assert rows(out.read_text())[0][:3] == ["n", "t", "d_A"]


def test_cli_divergent_run_exits_zero(capsys):
    assert main(["heat1d", "--gamma", "0.25", "--dt", "1e-5", "--t-end", "0.01", "--summary"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "diverged"


def test_cli_config_file_with_override(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[common]\ndt = 0.01\n[split-dof]\ngamma = 0.75\nt_end = 0.2\n")
    assert main(["split-dof", "--config", str(ini), "--summary"]) == 0
    first = json.loads(capsys.readouterr().out)
    assert first["steps"] == 20 and first["verdict"] == "bounded"
    assert main(["split-dof", "--config", str(ini), "--gamma", "0.25", "--t-end", "0.7",
                 "--summary"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "unbounded"


def test_cli_bad_config_key(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[split-dof]\nwobble = 3\n")
    assert main(["split-dof", "--config", str(ini)]) == 2


def test_cli_snapshot_file(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["heat1d", "--t-end", "0.05", "--snapshots", "0.05", "--out", str(out)]) == 0
    snap = tmp_path / "h_snapshots.csv"
    assert rows(snap.read_text())[0] == ["t", "x", "u", "u_exact", "v", "v_exact"]
