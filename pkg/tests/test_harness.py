import numpy as np
import pytest

from isac import cli, harness
from isac.scenario import ScenarioConfig, dump_scenario


@pytest.fixture
def small_cfg():
    return ScenarioConfig()


def test_beampattern_singleton(small_cfg):
    res = harness.run_beampattern(small_cfg, [0.0])
    assert res.n_rows == 1
    assert res.column("gain_db_wo_inter")[0] == 0.0
    assert res.column("gain_db_w_inter")[0] == 0.0


def test_beampattern_columns_and_peak(small_cfg):
    res = harness.run_beampattern(small_cfg, np.arange(-90, 90.1, 5.0))
    for name in ("gain_db_wo_inter", "gain_db_w_inter"):
        assert res.column(name).max() == 0.0
    assert "scenario_hash" in res.metadata and "solver_options" in res.metadata


def test_sweep_single_point_deterministic(small_cfg):
    a = harness.run_power_sweep(small_cfg, [40.0], antenna_list=(6,), n_trials=1)
    b = harness.run_power_sweep(small_cfg, [40.0], antenna_list=(6,), n_trials=1)
    assert a.to_csv() == b.to_csv()
    assert a.column("mi_wo_nats")[0] >= a.column("mi_w_nats")[0]


def test_sweep_infeasible_cells_marked(small_cfg):
    res = harness.run_power_sweep(small_cfg, [0.0], antenna_list=(6,), n_trials=3)
    assert res.column("n_infeasible")[0] == 3
    assert np.isnan(res.column("mi_wo_nats")[0])
    assert ",," in res.to_csv()


def test_sweep_rejects_zero_trials(small_cfg):
    with pytest.raises(ValueError):
        harness.run_power_sweep(small_cfg, [40.0], n_trials=0)


def test_timing_minimum_repeats(small_cfg):
    with pytest.raises(ValueError):
        harness.run_timing(small_cfg, n_repeats=9)


def test_timing_agreement(small_cfg):
    res = harness.run_timing(small_cfg, n_repeats=10, n_warmup=1)
    np.testing.assert_allclose(res.column("mi_sdr_nats"), res.column("mi_closed_nats"), rtol=1e-4)
    assert res.runtime["speedup"] > 1


def test_monte_carlo_audit(small_cfg):
    res = harness.run_monte_carlo(small_cfg, n_trials=5)
    ok = res.column("status") == "ok"
    assert ok.all()
    assert np.all(res.column("rate_wo_bps") >= small_cfg.rate_threshold_bps - 1e-6)
    assert np.all(res.column("rate_w_bps") >= small_cfg.rate_threshold_bps - 1e-6)
    np.testing.assert_allclose(res.column("power_wo_w"), small_cfg.p0, rtol=1e-8)
    assert np.all(res.column("mi_wo_nats") >= res.column("mi_w_nats"))


def test_monte_carlo_flags_infeasible(small_cfg):
    res = harness.run_monte_carlo(small_cfg.replace(p0_dbm=0.0), n_trials=2)
    assert list(res.column("status")) == ["missing", "missing"]
    assert list(res.column("reason")) == ["infeasible", "infeasible"]


def test_monte_carlo_zero_trials(small_cfg):
    with pytest.raises(ValueError):
        harness.run_monte_carlo(small_cfg, n_trials=0)


def test_result_rejects_ragged_columns():
    with pytest.raises(ValueError):
        harness.ExperimentResult("x", {"a": [1, 2], "b": [1]})


def test_csv_layout(tmp_path, small_cfg):
    res = harness.run_beampattern(small_cfg, [-10.0, 0.0, 10.0])
    path = tmp_path / "bp.csv"
    res.to_csv(path)
    lines = path.read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    assert any(ln.startswith("# scenario_hash:") for ln in meta)
    assert any(ln.startswith("# seed:") for ln in meta)
    assert any(ln.startswith("# artifact_version:") for ln in meta)
    body = lines[len(meta):]
    assert body[0].startswith("angle_deg,gain_db_wo_inter,gain_db_w_inter")
    assert len(body) == 4


def test_cli_beampattern_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["beampattern", "--grid=-20:20:10", "--out", str(out1)]) == 0
    assert cli.main(["beampattern", "--grid=-20:20:10", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_seed_changes_output(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["beampattern", "--grid=0,30", "--out", str(out1), "--seed", "1"])
    cli.main(["beampattern", "--grid=0,30", "--out", str(out2), "--seed", "2"])
    assert out1.read_text() != out2.read_text()


def test_cli_scenario_file(tmp_path, capsys):
    scen = tmp_path / "s.yaml"
    dump_scenario(ScenarioConfig(interferer_angle_deg=-30.0), scen)
    assert cli.main(["beampattern", "--scenario", str(scen), "--grid=-30,0", "--summary"]) == 0
    out = capsys.readouterr().out
    assert "interferer_angle_deg=-30.0" in out
    assert "beampattern: 2 rows" in out


def test_cli_config_error_exit_code(tmp_path, capsys):
    scen = tmp_path / "bad.yaml"
    scen.write_text("n_tx: 6\nbogus_key: 1\n")
    assert cli.main(["beampattern", "--scenario", str(scen)]) == 2
    assert "bogus_key" in capsys.readouterr().err


def test_cli_argument_error_exit_code():
    assert cli.main(["timing", "--repeats", "3"]) == 2
    assert cli.main(["monte-carlo", "--trials", "0"]) == 2


def test_cli_solver_failure_exit_code(tmp_path):
    scen = tmp_path / "low.yaml"
    dump_scenario(ScenarioConfig(p0_dbm=0.0), scen)
    assert cli.main(["beampattern", "--scenario", str(scen), "--grid=0"]) == 1


def test_parse_grid():
    np.testing.assert_allclose(cli.parse_grid("20:40:10"), [20, 30, 40])
    np.testing.assert_allclose(cli.parse_grid("-30,0,30"), [-30, 0, 30])
    with pytest.raises(Exception):
        cli.parse_grid("1:2:0")
