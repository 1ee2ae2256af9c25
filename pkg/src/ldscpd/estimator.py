"""Scikit-learn style front end for the sliding-window detector.

The detector itself is an online state machine; this wrapper gives it the
familiar ``fit``/``predict`` surface (with ``get_params``/``set_params``
and ``clone`` support inherited from :class:`sklearn.base.BaseEstimator`)
so it can sit inside pipelines, grid searches and cross-validation

    det = OnlineChangePointDetector(window=250, noise_bound=1.0,
                                    dynamics_bound=8.0, false_alarm=1e-4)
    det.fit(states, inputs)
    det.change_points_
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .detector import DetectionReport, DetectorConfig, run_detector
from .simulate import Trajectory
from .windows import DEFAULT_REBUILD_EVERY


def validate_trajectory_arrays(
    X, U=None
) -> tuple[np.ndarray, np.ndarray]:
    """Coerce (states, inputs) to aligned float64 arrays.

    ``X`` holds the states, one row per time step; ``U`` holds the inputs
    and must have exactly one row fewer (the last state has no successor).
    ``U=None`` means an autonomous system (no input columns).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"states must be 2-D, got shape {X.shape}")
    if len(X) < 2:
        raise ValueError("need at least two states (one transition)")
    if U is None:
        U = np.empty((len(X) - 1, 0))
    U = np.asarray(U, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    if U.ndim != 2:
        raise ValueError(f"inputs must be 2-D, got shape {U.shape}")
    if len(U) != len(X) - 1:
        raise ValueError(
            f"inputs must have one row per transition: got {len(U)} rows "
            f"for {len(X)} states"
        )
    if not np.isfinite(X).all() or not np.isfinite(U).all():
        raise ValueError("states and inputs must be finite")
    return X, U


class OnlineChangePointDetector(BaseEstimator):
    """Detect dynamics changes in a state/input time series.

    Parameters
    ----------
    window:
        Size parameter N; both comparison windows hold N-1 samples and the
        first monitored step is 2N-1.
    reg:
        Ridge regularizer for the per-window least squares fits.
    false_alarm:
        Per-step false alarm budget in (0, 1).
    noise_bound, dynamics_bound:
        Known upper bounds on the process noise level and on the spectral
        norm of the stacked parameter matrix; required unless
        ``gamma_override`` is given.
    gamma_override:
        Fixed threshold replacing the data-dependent one (forfeits the
        false-alarm guarantee).
    rebuild_every:
        Slides between from-scratch window recomputations.

    Attributes
    ----------
    change_points_ : ndarray of flagged step indices after ``fit``.
    report_ : per-step statistics, thresholds and flags.
    """

    def __init__(
        self,
        window: int = 50,
        reg: float = 1.0,
        false_alarm: float = 0.01,
        noise_bound: float | None = None,
        dynamics_bound: float | None = None,
        gamma_override: float | None = None,
        rebuild_every: int = DEFAULT_REBUILD_EVERY,
    ):
        self.window = window
        self.reg = reg
        self.false_alarm = false_alarm
        self.noise_bound = noise_bound
        self.dynamics_bound = dynamics_bound
        self.gamma_override = gamma_override
        self.rebuild_every = rebuild_every

    def _config(self, n: int, p: int) -> DetectorConfig:
        if self.gamma_override is not None:
            return DetectorConfig(
                n=n,
                p=p,
                N=self.window,
                lam=self.reg,
                override_gamma=self.gamma_override,
                rebuild_every=self.rebuild_every,
            )
        return DetectorConfig(
            n=n,
            p=p,
            N=self.window,
            lam=self.reg,
            delta=self.false_alarm,
            b_sigma_w=self.noise_bound,
            b_theta=self.dynamics_bound,
            rebuild_every=self.rebuild_every,
        )

    def _run(self, X, U) -> DetectionReport:
        X, U = validate_trajectory_arrays(X, U)
        traj = Trajectory(states=X, inputs=U)
        return run_detector(traj, self._config(traj.n, traj.p))

    def fit(self, X, U=None):
        """Run detection over the whole series and record the outcomes."""
        self.report_ = self._run(X, U)
        self.change_points_ = self.report_.flags
        self.n_features_in_ = np.asarray(X).shape[1] if np.asarray(X).ndim == 2 else 1
        return self

    def predict(self, X=None, U=None) -> np.ndarray:
        """Flagged step indices; on new data if given, else from ``fit``."""
        if X is None:
            if not hasattr(self, "change_points_"):
                raise ValueError("call fit first, or pass data to predict")
            return self.change_points_
        return self._run(X, U).flags

    def fit_predict(self, X, U=None) -> np.ndarray:
        return self.fit(X, U).change_points_
