import json
import logging

import numpy as np
import pytest

from meekf.errors import ValidationError
from meekf.experiments import ExperimentConfig, component_metric, mse_metric, run_fusion, run_sir, run_vehicle
from meekf.experiments import io as exp_io
from meekf.experiments.fusion import SensorStream, figure_eight, fuse, synthetic_stream
from meekf.experiments.montecarlo import worker_count
from meekf.statespace import Trajectory


class TestMetric:
    def test_identical_is_zero(self):
        x = np.arange(12.0).reshape(4, 3)
        assert mse_metric(x, x) == 0.0

    def test_hand_value(self):
        assert mse_metric(np.zeros((2, 1)), np.array([[1.0], [-1.0]])) == 1.0

    def test_one_norm_not_squared(self):
        truth = np.zeros((2, 2))
        est = np.array([[3.0, -4.0], [0.0, 0.0]])
        assert mse_metric(truth, est) == 3.5
        assert np.allclose(component_metric(truth, est), [1.5, 2.0])

    def test_homogeneity(self, rng):
        t, e = rng.normal(size=(50, 4)), rng.normal(size=(50, 4))
        assert mse_metric(t, t + 2 * (e - t)) == pytest.approx(2 * mse_metric(t, e))

    def test_accepts_trajectory(self):
        traj = Trajectory(np.ones((3, 2)), np.zeros((3, 1)))
        assert mse_metric(traj, np.zeros((3, 2))) == 2.0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            mse_metric(np.zeros((3, 2)), np.zeros((4, 2)))


class TestConfig:
    def test_defaults(self):
        c = ExperimentConfig("vehicle")
        assert c.steps == 5000 and c.noise_case == 4 and c.filters == ("KF", "MCKF", "MEEKF")
        assert c.sigma_for("MCKF") == 5.0 and c.sigma_for("MEEKF") == 1.5

    def test_case_kernel_sizes(self):
        assert ExperimentConfig("vehicle", noise_case=2).sigma_for("MEEKF") == 2.0
        assert ExperimentConfig("fusion").sigma_for("MEEEKF") == 1.66
        assert ExperimentConfig("sir").sigma_for("MCEKF") == 16.0

    def test_override(self):
        assert ExperimentConfig("vehicle", sigmas={"MEEKF": 3.0}).fixed_point("MEEKF").sigma == 3.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(scenario="radar"),
            dict(scenario="vehicle", steps=0),
            dict(scenario="vehicle", runs=0),
            dict(scenario="vehicle", noise_case=9),
            dict(scenario="sir", noise_case=1),
            dict(scenario="vehicle", filters=("EKF",)),
            dict(scenario="sir", filters=("KF",)),
            dict(scenario="vehicle", filters=("XKF",)),
            dict(scenario="vehicle", sigmas={"KF": 1.0}),
            dict(scenario="vehicle", sigmas={"MEEKF": -1.0}),
            dict(scenario="vehicle", epsilon=0.0),
            dict(scenario="fusion", fusion_merge="max"),
            dict(scenario="vehicle", seed=-1),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            ExperimentConfig(**kwargs)


class TestMonteCarlo:
    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("REF_THREADS", "3")
        assert worker_count() == 3
        monkeypatch.setenv("REF_THREADS", "0")
        assert worker_count() >= 1
        monkeypatch.setenv("REF_THREADS", "x")
        with pytest.raises(ValidationError):
            worker_count()

    def test_vehicle_report_shape_and_seeds(self):
        c = ExperimentConfig("vehicle", steps=60, runs=3, seed=5)
        rep = run_vehicle(c, workers=1)
        assert rep.filters == ("KF", "MCKF", "MEEKF")
        assert rep.per_run["KF"].shape == (3, 4)
        assert len(rep.rows()) == 12 and all(r.mse_std >= 0 for r in rep.rows())
        assert rep.iterations["KF"] == (0.0, 0)
        single = run_vehicle(ExperimentConfig("vehicle", steps=60, runs=1, seed=6), workers=1)
        assert np.array_equal(single.per_run["MEEKF"][0], rep.per_run["MEEKF"][1])

    def test_workers_do_not_change_results(self):
        c = ExperimentConfig("vehicle", steps=40, runs=2, noise_case=2)
        a, b = run_vehicle(c, workers=1), run_vehicle(c, workers=2)
        for f in a.filters:
            assert np.array_equal(a.per_run[f], b.per_run[f])

    def test_zero_noise_kf_converges_to_truth(self):
        rep = run_vehicle(ExperimentConfig("vehicle", steps=400, runs=1, zero_noise=True,
                                           noise_case=1, filters=("KF",)), workers=1)
        est, truth = rep.trajectory.estimates["KF"], rep.trajectory.truth
        assert np.abs(est[-1] - truth[-1]).max() < 0.05

    def test_wrong_scenario(self):
        with pytest.raises(TypeError):
            run_vehicle(ExperimentConfig("sir"))


class TestSir:
    def test_synthetic_run(self):
        rep = run_sir(ExperimentConfig("sir", runs=3), workers=1)
        assert rep.components == ("i",) and rep.steps == 3 * 52
        assert set(rep.filters) == {"EKF", "MCEKF", "MEEEKF"}
        assert all(v > 0 for v in rep.min_cov_eig.values())

    def test_zero_noise_matched_ekf_tracks(self):
        rep = run_sir(ExperimentConfig("sir", runs=1, zero_noise=True, sir_truth="matched",
                                       filters=("EKF",)), workers=1)
        assert rep.mean("EKF", "i") < 2e-3

    def test_data_file_with_clamping(self, tmp_path, caplog):
        path = tmp_path / "ili.csv"
        vals = [0.01, 0.02, 0.04, 0.07, 0.1, 0.12, 0.1, 0.07, 1.3, 0.03]
        path.write_text("week,ili_fraction\n" + "".join(f"{i + 1},{v}\n" for i, v in enumerate(vals)))
        with caplog.at_level(logging.WARNING):
            series = exp_io.read_sir_csv(path)
        assert series[8] == 1.0 and "clamped" in caplog.text
        rep = run_sir(ExperimentConfig("sir", data_path=str(path), runs=5), workers=1)
        assert rep.per_run["EKF"].shape == (1, 1) and rep.steps == 10

    def test_bad_sir_file(self, tmp_path):
        path = tmp_path / "ili.csv"
        path.write_text("week,ili_fraction\n1,0.1\n2,oops\n")
        with pytest.raises(ValidationError, match=":3:"):
            exp_io.read_sir_csv(path)


class TestFusion:
    def test_figure_eight_velocity_is_derivative(self):
        t = np.linspace(0, 25, 2001)
        x = figure_eight(t)
        dt = t[1] - t[0]
        assert np.allclose(np.gradient(x[:, 0], dt)[5:-5], x[5:-5, 2], atol=1e-3)
        assert np.allclose(np.gradient(x[:, 1], dt)[5:-5], x[5:-5, 3], atol=1e-3)

    def test_stream_alternates(self):
        st = synthetic_stream(6, seed=1)
        assert [g[0].sensor for g in st.groups] == ["L", "R", "L", "R", "L", "R"]
        st2 = synthetic_stream(3, seed=1, simultaneous=True)
        assert all(len(g) == 2 for g in st2.groups)

    def test_lidar_only_equals_linear_filter(self):
        from meekf.filters import kf_predict, kf_update, FilterState
        from meekf import systems

        st = synthetic_stream(40, seed=2)
        lidar = SensorStream(st.times[::2], st.groups[::2], st.truth[::2])
        out = fuse(lidar, "KF", "EKF", {})
        state = FilterState(np.array([*lidar.groups[0][0].values, 0.0, 0.0]), systems.FUSION_PRIOR_P)
        model = systems.lidar_model(0.2)
        for k in range(1, len(lidar)):
            state = kf_update(kf_predict(state, model), lidar.groups[k][0].values, model)
            assert np.allclose(out[k].x_post, state.x_post)

    def test_run_report(self):
        rep = run_fusion(ExperimentConfig("fusion", steps=60, runs=2), workers=1)
        assert rep.filters == ("KF/EKF", "MCKF/MCEKF", "MEEKF/MEEEKF")
        assert rep.components[-1] == "total"
        for f in rep.filters:
            assert rep.mean(f, "total") == pytest.approx(rep.mean(f)[:4].sum())

    def test_parallel_merge_runs(self):
        rep = run_fusion(ExperimentConfig("fusion", steps=30, runs=1, fusion_merge="parallel",
                                          filters=("KF", "EKF")), workers=1)
        assert rep.mean("KF/EKF", "total") < 5

    def test_csv_input(self, tmp_path):
        path = tmp_path / "obs.csv"
        st = synthetic_stream(20, seed=4)
        lines = ["timestamp,sensor,v1,v2,v3,gt_px,gt_py,gt_vx,gt_vy"]
        for t, g, x in zip(st.times, st.groups, st.truth):
            m = g[0]
            vals = list(m.values) + ([""] if m.sensor == "L" else [])
            lines.append(",".join([repr(int(round(t * 1e6))), m.sensor] + [str(v) for v in vals]
                                  + [repr(float(v)) for v in x]))
        path.write_text("\n".join(lines) + "\n")
        parsed = exp_io.read_fusion_csv(path, time_scale=1e-6)
        assert len(parsed) == 20 and np.allclose(parsed.times, st.times)
        assert np.allclose(parsed.truth, st.truth)
        rep = run_fusion(ExperimentConfig("fusion", data_path=str(path), time_scale=1e-6), workers=1)
        direct = run_fusion(ExperimentConfig("fusion", steps=20, runs=1, seed=4), workers=1)
        for f in rep.filters:
            assert rep.mean(f, "total") == pytest.approx(direct.mean(f, "total"), rel=1e-9)

    def test_csv_without_truth(self, tmp_path):
        path = tmp_path / "obs.csv"
        path.write_text("timestamp,sensor,v1,v2,v3\n0,L,1.0,2.0,\n1,R,2.0,7.0,0.1\n")
        parsed = exp_io.read_fusion_csv(path)
        assert parsed.truth is None
        assert -np.pi < parsed.groups[1][0].values[1] <= np.pi
        rep = run_fusion(ExperimentConfig("fusion", data_path=str(path)), workers=1)
        assert np.isnan(rep.mean("KF/EKF", "total"))

    @pytest.mark.parametrize(
        "body, line",
        [
            ("0,L,1.0,abc,\n", 2),
            ("0,L,1.0,2.0,\n1,X,1,2,3\n", 3),
            ("0,L,1.0,2.0,\n1,R,1,2\n", 3),
            ("5,L,1.0,2.0,\n1,L,1,2,\n", 3),
        ],
    )
    def test_malformed_rows(self, tmp_path, body, line):
        path = tmp_path / "obs.csv"
        path.write_text("timestamp,sensor,v1,v2,v3\n" + body)
        with pytest.raises(ValidationError, match=f":{line}:"):
            exp_io.read_fusion_csv(path)


class TestWriters:
    def test_summary_and_manifest(self, tmp_path):
        rep = run_vehicle(ExperimentConfig("vehicle", steps=30, runs=2), workers=1)
        exp_io.write_summary_csv(rep, tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "filter,component,mse_mean,mse_std,iter_mean,iter_max,fallbacks"
        assert len(lines) == 13
        assert float(lines[1].split(",")[2]) == rep.mean("KF", "x1")
        exp_io.write_manifest(tmp_path / "m.json", {"b": 1, "a": [1, 2]})
        text = (tmp_path / "m.json").read_text()
        assert json.loads(text) == {"a": [1, 2], "b": 1} and text.index('"a"') < text.index('"b"')

    def test_trajectory_csv(self, tmp_path):
        rep = run_fusion(ExperimentConfig("fusion", steps=10, runs=1), workers=1)
        exp_io.write_trajectory_csv(rep.trajectory, tmp_path / "t.csv")
        header = (tmp_path / "t.csv").read_text().splitlines()[0].split(",")
        assert header[:5] == ["k", "truth_1", "truth_2", "truth_3", "truth_4"]
        assert "est_MEEKF_MEEEKF_4" in header

    def test_per_run_csv(self, tmp_path):
        rep = run_sir(ExperimentConfig("sir", runs=2), workers=1)
        exp_io.write_per_run_csv(rep, tmp_path / "p.csv")
        assert len((tmp_path / "p.csv").read_text().splitlines()) == 1 + 2 * 3
