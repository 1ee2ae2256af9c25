import numpy as np
import pytest
from sklearn.base import clone

from ldscpd import (
    DetectorConfig,
    OnlineChangePointDetector,
    run_detector,
    validate_trajectory_arrays,
)

from conftest import short_run


def fitted_detector(traj, **kw):
    params = dict(window=8, reg=1.0, false_alarm=1e-3, noise_bound=1.0, dynamics_bound=5.0)
    params.update(kw)
    det = OnlineChangePointDetector(**params)
    return det.fit(traj.states, traj.inputs)


class TestSklearnProtocol:
    def test_get_params_round_trip(self):
        det = OnlineChangePointDetector(window=12, reg=0.5, noise_bound=2.0)
        params = det.get_params()
        assert params["window"] == 12
        assert params["reg"] == 0.5
        other = OnlineChangePointDetector().set_params(**params)
        assert other.get_params() == params

    def test_clone(self, stable_system):
        traj = short_run(stable_system, seed=0, horizon=60)
        det = fitted_detector(traj)
        twin = clone(det)
        assert twin.get_params() == det.get_params()
        assert not hasattr(twin, "change_points_")

    def test_fit_returns_self_and_sets_attributes(self, switching_system):
        traj = short_run(switching_system, seed=1, horizon=150)
        det = OnlineChangePointDetector(
            window=8, noise_bound=1.0, dynamics_bound=3.0, false_alarm=1e-3
        )
        assert det.fit(traj.states, traj.inputs) is det
        assert hasattr(det, "report_")
        assert isinstance(det.change_points_, np.ndarray)


class TestEquivalenceWithCoreApi:
    def test_fit_matches_run_detector(self, switching_system):
        traj = short_run(switching_system, seed=2, horizon=200)
        det = fitted_detector(traj)
        cfg = DetectorConfig(
            n=2, p=1, N=8, lam=1.0, delta=1e-3, b_sigma_w=1.0, b_theta=5.0
        )
        report = run_detector(traj, cfg)
        assert np.array_equal(det.report_.statistic, report.statistic)
        assert np.array_equal(det.report_.gamma, report.gamma)
        assert np.array_equal(det.change_points_, report.flags)

    def test_predict_after_fit_returns_flags(self, switching_system):
        traj = short_run(switching_system, seed=3, horizon=200)
        det = fitted_detector(traj, gamma_override=0.5, noise_bound=None, dynamics_bound=None, false_alarm=0.01)
        assert np.array_equal(det.predict(), det.change_points_)

    def test_predict_on_new_data(self, switching_system, stable_system):
        fit_traj = short_run(switching_system, seed=4, horizon=200)
        new_traj = short_run(stable_system, seed=5, horizon=120)
        det = fitted_detector(fit_traj)
        flags_new = det.predict(new_traj.states, new_traj.inputs)
        # Fitted attributes must be untouched by predict.
        assert np.array_equal(det.predict(), det.change_points_)
        assert isinstance(flags_new, np.ndarray)

    def test_fit_predict(self, switching_system):
        traj = short_run(switching_system, seed=6, horizon=150)
        det = OnlineChangePointDetector(window=8, gamma_override=0.0)
        flags = det.fit_predict(traj.states, traj.inputs)
        assert np.array_equal(flags, det.change_points_)

    def test_autonomous_series_without_inputs(self):
        rng = np.random.default_rng(7)
        x = np.cumsum(rng.standard_normal(80) * 0.1)[:, None]
        det = OnlineChangePointDetector(window=5, gamma_override=1e9)
        det.fit(x)
        assert len(det.change_points_) == 0


class TestValidation:
    def test_predict_before_fit_raises(self):
        det = OnlineChangePointDetector()
        with pytest.raises(ValueError, match="fit first"):
            det.predict()

    def test_misaligned_lengths_rejected(self):
        X = np.zeros((10, 2))
        U = np.zeros((10, 1))
        with pytest.raises(ValueError, match="one row per transition"):
            validate_trajectory_arrays(X, U)

    def test_non_finite_rejected(self):
        X = np.zeros((10, 2))
        X[3, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            validate_trajectory_arrays(X, np.zeros((9, 1)))

    def test_one_dimensional_states_promoted(self):
        X, U = validate_trajectory_arrays(np.zeros(5), np.zeros(4))
        assert X.shape == (5, 1)
        assert U.shape == (4, 1)

    def test_missing_bounds_fail_at_fit(self, stable_system):
        traj = short_run(stable_system, seed=8, horizon=60)
        det = OnlineChangePointDetector(window=6)
        with pytest.raises(ValueError, match="guarantees mode"):
            det.fit(traj.states, traj.inputs)
