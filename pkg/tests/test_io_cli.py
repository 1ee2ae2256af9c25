import json
import subprocess
import sys

import numpy as np
import pytest

from ldscpd import DetectorConfig, NoiseSpec, run_detector, uav_schedule
from ldscpd import io as lio
from ldscpd.cli import main

from conftest import short_run


@pytest.fixture
def sim_config_path(tmp_path, switching_system):
    data = lio.sim_config_to_dict(
        switching_system, NoiseSpec(1.0, 1.0, 5), horizon=160
    )
    data["detector"] = {
        "N": 8,
        "lambda": 1.0,
        "delta": 1e-3,
        "b_sigma_w": 1.0,
        "b_theta": 5.0,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestConfigRoundTrip:
    def test_schedule_round_trip(self, switching_system):
        data = lio.schedule_to_dict(switching_system)
        back = lio.schedule_from_dict(data)
        assert back.n == switching_system.n
        assert back.p == switching_system.p
        assert back.change_points == switching_system.change_points
        for a, b in zip(back.segments, switching_system.segments):
            assert a.start == b.start
            assert np.array_equal(a.A, b.A)
            assert np.array_equal(a.B, b.B)

    def test_sim_config_round_trip(self, switching_system, tmp_path):
        data = lio.sim_config_to_dict(
            switching_system, NoiseSpec(0.5, 2.0, 99), horizon=70, x0=np.ones(2)
        )
        path = tmp_path / "sim.json"
        lio.dump_json(data, path)
        schedule, noise, horizon, x0 = lio.sim_config_from_dict(lio.load_json(path))
        assert noise == NoiseSpec(0.5, 2.0, 99)
        assert horizon == 70
        assert np.array_equal(x0, np.ones(2))
        assert schedule.change_points == switching_system.change_points

    def test_missing_keys_reported(self):
        with pytest.raises(ValueError, match="missing key"):
            lio.schedule_from_dict({"n": 2, "p": 1})
        with pytest.raises(ValueError, match="missing key 'sigma_u'"):
            lio.sim_config_from_dict(
                lio.schedule_to_dict(uav_schedule())
            )

    def test_detector_config_from_dict(self):
        cfg = lio.detector_config_from_dict(
            {"N": 9, "lambda": 0.5, "delta": 1e-2, "b_sigma_w": 1.0, "b_theta": 2.0},
            n=3,
            p=1,
        )
        assert cfg == DetectorConfig(
            n=3, p=1, N=9, lam=0.5, delta=1e-2, b_sigma_w=1.0, b_theta=2.0
        )

    def test_experiment_config_from_dict_uav(self):
        cfg = lio.experiment_config_from_dict(
            {
                "schedule": "uav",
                "N_list": [50, 150],
                "runs": 2,
                "horizon": 9000,
                "base_seed": 3,
                "delta": {"a": 1000.0},
            }
        )
        assert cfg.window_sizes == (50, 150)
        assert cfg.delta_scale == 1000.0
        assert cfg.schedule.change_points == [2500, 5000]

    def test_experiment_config_bad_delta(self):
        with pytest.raises(ValueError, match="delta"):
            lio.experiment_config_from_dict(
                {"schedule": "uav", "N_list": [50], "delta": {"b": 1.0}}
            )


class TestTrajectoryCsv:
    def test_round_trip_bitwise(self, switching_system):
        traj = short_run(switching_system, seed=1, horizon=40)
        text = lio.trajectory_to_csv(traj)
        back = lio.trajectory_from_csv(text)
        assert np.array_equal(back.states, traj.states)
        assert np.array_equal(back.inputs, traj.inputs)

    def test_header_layout(self, switching_system):
        traj = short_run(switching_system, seed=2, horizon=3)
        lines = lio.trajectory_to_csv(traj).strip().splitlines()
        assert lines[0] == "k,x_1,x_2,u_1"
        assert len(lines) == 1 + 4  # header + T rows + final state row
        assert lines[-1].endswith(",")  # empty input cell on the last row

    def test_malformed_header_rejected(self):
        with pytest.raises(ValueError, match="header"):
            lio.trajectory_from_csv("a,b,c\n1,2,3\n")

    def test_missing_final_row_rejected(self, switching_system):
        traj = short_run(switching_system, seed=3, horizon=5)
        lines = lio.trajectory_to_csv(traj).strip().splitlines()
        with pytest.raises(ValueError, match="final state row"):
            lio.trajectory_from_csv("\n".join(lines[:-1]) + "\n")


class TestReportCsv:
    def test_columns_and_values(self, switching_system):
        traj = short_run(switching_system, seed=4, horizon=60)
        cfg = DetectorConfig(
            n=2, p=1, N=6, lam=1.0, delta=1e-3, b_sigma_w=1.0, b_theta=5.0
        )
        report = run_detector(traj, cfg)
        lines = lio.report_to_csv(report).strip().splitlines()
        assert lines[0] == "k,statistic,gamma,flagged,S_k"
        first = lines[1].split(",")
        assert int(first[0]) == 11
        assert float(first[1]) == report.statistic[0]
        assert first[3] in {"0", "1"}


class TestCli:
    def run_cli(self, *args):
        return main([str(a) for a in args])

    def test_simulate_detect_pipeline(self, tmp_path, sim_config_path):
        traj_path = tmp_path / "traj.csv"
        report_path = tmp_path / "report.csv"
        assert self.run_cli("simulate", "--config", sim_config_path, "--out", traj_path) == 0
        assert traj_path.exists()
        assert (
            self.run_cli(
                "detect", "--config", sim_config_path, "--traj", traj_path,
                "--out", report_path,
            )
            == 0
        )
        lines = report_path.read_text().strip().splitlines()
        assert lines[0] == "k,statistic,gamma,flagged,S_k"
        assert len(lines) == 1 + (160 - 2 * 8 + 1)

    def test_simulate_deterministic_bytes(self, tmp_path, sim_config_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        self.run_cli("simulate", "--config", sim_config_path, "--out", out1)
        self.run_cli("simulate", "--config", sim_config_path, "--out", out2)
        assert out1.read_bytes() == out2.read_bytes()

    def test_experiment_outputs(self, tmp_path, switching_system):
        config = {
            "experiment": {
                "schedule": lio.schedule_to_dict(switching_system),
                "N_list": [5, 7],
                "runs": 2,
                "horizon": 120,
                "base_seed": 4,
                "delta": 1e-3,
                "lambda": 1.0,
            }
        }
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        out_dir = tmp_path / "out"
        assert self.run_cli("experiment", "--config", cfg_path, "--out-dir", out_dir) == 0
        for name in ("table.csv", "table.txt", "figure_N5.csv", "figure_N7.csv", "bounds.json"):
            assert (out_dir / name).exists(), name
        bounds = json.loads((out_dir / "bounds.json").read_text())
        assert bounds["runs"] == 2
        assert "5" in bounds["per_window"]

    def test_experiment_deterministic_bytes(self, tmp_path, switching_system):
        config = {
            "experiment": {
                "schedule": lio.schedule_to_dict(switching_system),
                "N_list": [5],
                "runs": 2,
                "horizon": 100,
                "base_seed": 9,
                "delta": 1e-3,
            }
        }
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        self.run_cli("experiment", "--config", cfg_path, "--out-dir", tmp_path / "o1")
        self.run_cli("experiment", "--config", cfg_path, "--out-dir", tmp_path / "o2")
        for name in ("table.csv", "table.txt", "figure_N5.csv", "bounds.json"):
            assert (tmp_path / "o1" / name).read_bytes() == (
                tmp_path / "o2" / name
            ).read_bytes()

    def test_validation_failure_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"n\": 2}", encoding="utf-8")
        code = self.run_cli("simulate", "--config", bad, "--out", tmp_path / "x.csv")
        assert code == 2

    def test_invalid_json_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("not json", encoding="utf-8")
        assert self.run_cli("simulate", "--config", bad, "--out", tmp_path / "x.csv") == 2

    def test_console_entry_point(self, tmp_path, sim_config_path):
        result = subprocess.run(
            [sys.executable, "-m", "ldscpd.cli", "simulate", "--config",
             str(sim_config_path), "--out", str(tmp_path / "t.csv")],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
