"""Online change point detection by comparing two sliding ridge estimates.

At each monitored step k two disjoint width-(N-1) windows of (regressor,
next-state) pairs are maintained: a reference window ending N steps in the
past and a test window ending at the newest sample, separated by one skipped
index.  Each window is fitted with a ridge-regularized least squares model

    theta_hat = cross (gram + lam I)^{-1}

and the detection statistic is the spectral norm of the difference between
the two fits.  The statistic is compared against a data-dependent threshold
built from per-window confidence terms (noise bound times a log-volume
factor over the square root of the smallest regularized eigenvalue) plus
regularization-bias terms; a step is flagged only if the statistic reaches
the threshold and no flag was raised in the last 2N-2 steps, so one change
never produces a cluster of flags.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .linalg import spd_solve, spectral_norm
from .simulate import Trajectory
from .windows import DEFAULT_REBUILD_EVERY, WindowState

_LOG9 = math.log(9.0)
_NOISE_FACTOR = 32.0 / 9.0


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters.

    Either the guarantee inputs (``delta``, ``b_sigma_w``, ``b_theta``) are
    all given and the data-dependent threshold is used, or a fixed
    ``override_gamma`` is given instead; the two modes are mutually
    exclusive.  ``override_gamma`` may be zero, which flags every eligible
    step and is useful for exercising the refractory rule.
    """

    n: int
    p: int
    N: int
    lam: float
    delta: float | None = None
    b_sigma_w: float | None = None
    b_theta: float | None = None
    override_gamma: float | None = None
    rebuild_every: int = DEFAULT_REBUILD_EVERY

    def __post_init__(self):
        if self.n < 1 or self.p < 0:
            raise ValueError("need state dimension n >= 1 and input dimension p >= 0")
        if self.N < 2:
            raise ValueError("window parameter N must be at least 2")
        if self.lam <= 0:
            raise ValueError("regularizer lambda must be positive")
        if self.rebuild_every < 1:
            raise ValueError("rebuild_every must be positive")
        if self.override_gamma is not None:
            if any(v is not None for v in (self.delta, self.b_sigma_w, self.b_theta)):
                raise ValueError(
                    "override_gamma is mutually exclusive with "
                    "delta/b_sigma_w/b_theta"
                )
            if self.override_gamma < 0:
                raise ValueError("override_gamma must be non-negative")
        else:
            if self.delta is None or self.b_sigma_w is None or self.b_theta is None:
                raise ValueError(
                    "guarantees mode needs delta, b_sigma_w and b_theta "
                    "(or set override_gamma)"
                )
            if not 0 < self.delta < 1:
                raise ValueError("delta must lie in (0, 1)")
            if self.b_sigma_w <= 0:
                raise ValueError("noise bound b_sigma_w must be positive")
            if self.b_theta <= 0:
                raise ValueError("dynamics bound b_theta must be positive")

    @property
    def dim(self) -> int:
        return self.n + self.p

    @property
    def refractory(self) -> int:
        """Minimum flag spacing: a new flag needs k - S > 2N - 2."""
        return 2 * self.N - 2

    @property
    def warmup_end(self) -> int:
        """First monitored step index (both windows full)."""
        return 2 * self.N - 1


@dataclass(frozen=True)
class StepRecord:
    """Outcome of one monitored step."""

    k: int
    statistic: float
    gamma: float
    flagged: bool
    last_change: int


def rls_estimate(window: WindowState, lam: float) -> np.ndarray:
    """Ridge estimate cross @ (gram + lam I)^{-1} via a symmetric solve."""
    if lam <= 0:
        raise ValueError("regularizer must be positive")
    reg = window.gram + lam * np.eye(window.dim)
    return spd_solve(reg, window.cross.T).T


def spectral_norm_diff(theta_a: np.ndarray, theta_b: np.ndarray) -> float:
    """Largest singular value of theta_a - theta_b."""
    theta_a = np.asarray(theta_a, dtype=np.float64)
    theta_b = np.asarray(theta_b, dtype=np.float64)
    if theta_a.shape != theta_b.shape:
        raise ValueError(
            f"shape mismatch: {theta_a.shape} vs {theta_b.shape}"
        )
    return spectral_norm(theta_a - theta_b)


def threshold(ref: WindowState, test: WindowState, cfg: DetectorConfig) -> float:
    """Data-dependent flag level for the current pair of windows.

    Per window: a noise term  b_sigma_w * sqrt((32/9) (log(2 * 9^n / delta)
    + logdet_vbar / 2)) / sqrt(min eig of the regularized gram), plus a bias
    term  lam * b_theta / (min eig of the regularized gram); the threshold
    is the sum of all four terms.
    """
    if cfg.delta is None or cfg.b_sigma_w is None or cfg.b_theta is None:
        raise ValueError("threshold needs a guarantees-mode config")
    log_term = cfg.n * _LOG9 + math.log(2.0 / cfg.delta)
    total = 0.0
    for window in (ref, test):
        min_eig = window.min_eig_regularized(cfg.lam)
        confidence = log_term + 0.5 * window.logdet_vbar(cfg.lam)
        total += cfg.b_sigma_w * math.sqrt(_NOISE_FACTOR * confidence / min_eig)
        total += cfg.lam * cfg.b_theta / min_eig
    return total


class Detector:
    """Sequential detector state; strictly single-stream.

    Construct with the initial state x[0], then feed one sample per step:
    step k consumes (x[k+1], u[k]).  Steps before both windows are full
    only accumulate data and return None; from step 2N-1 onwards each call
    returns a :class:`StepRecord`.
    """

    def __init__(self, cfg: DetectorConfig, x0: np.ndarray):
        x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
        if x0.shape != (cfg.n,):
            raise ValueError(f"x0 must have dimension {cfg.n}, got {x0.shape}")
        self.cfg = cfg
        self.k = 0
        self.last_change = 0
        self.warmed = False
        self.ref_window: WindowState | None = None
        self.test_window: WindowState | None = None
        self._x_now = x0
        # Warm-up accumulator; after warm-up, the pairs with time index in
        # [k - N, k] (the test window plus the one in transit to the
        # reference window).
        self._recent: deque[tuple[np.ndarray, np.ndarray]] = deque()

    def step(self, x_next: np.ndarray, u: np.ndarray) -> StepRecord | None:
        """Consume the sample (x[k+1], u[k]) and advance one step."""
        cfg = self.cfg
        x_next = np.asarray(x_next, dtype=np.float64).reshape(-1)
        u = np.asarray(u, dtype=np.float64).reshape(-1)
        if x_next.shape != (cfg.n,):
            raise ValueError(f"state must have dimension {cfg.n}")
        if u.shape != (cfg.p,):
            raise ValueError(f"input must have dimension {cfg.p}")
        k = self.k
        pair = (np.concatenate([self._x_now, u]), x_next)
        self._x_now = x_next
        self.k += 1

        N = cfg.N
        if not self.warmed:
            self._recent.append(pair)
            if k < cfg.warmup_end:
                return None
            # Pairs 0..2N-1 are now available: reference covers 1..N-1,
            # test covers N+1..2N-1, index N sits between the windows.
            pairs = list(self._recent)
            self.ref_window = WindowState(
                pairs[1:N], rebuild_every=cfg.rebuild_every
            )
            self.test_window = WindowState(
                pairs[N + 1 :], rebuild_every=cfg.rebuild_every
            )
            self._recent = deque(pairs[N - 1 :], maxlen=N + 1)
            self.warmed = True
        else:
            self.ref_window.slide(*self._recent[1])
            self.test_window.slide(*pair)
            self._recent.append(pair)
        return self._evaluate(k)

    def _evaluate(self, k: int) -> StepRecord:
        cfg = self.cfg
        theta_ref = rls_estimate(self.ref_window, cfg.lam)
        theta_test = rls_estimate(self.test_window, cfg.lam)
        statistic = spectral_norm_diff(theta_ref, theta_test)
        if cfg.override_gamma is not None:
            gamma = cfg.override_gamma
        else:
            gamma = threshold(self.ref_window, self.test_window, cfg)
        flagged = statistic >= gamma and (k - self.last_change) > cfg.refractory
        if flagged:
            self.last_change = k
        return StepRecord(
            k=k,
            statistic=statistic,
            gamma=gamma,
            flagged=flagged,
            last_change=self.last_change,
        )


@dataclass
class DetectionReport:
    """Per-step outcomes of one detector run, as aligned arrays."""

    ks: np.ndarray
    statistic: np.ndarray
    gamma: np.ndarray
    flagged: np.ndarray
    last_change: np.ndarray

    @property
    def flags(self) -> np.ndarray:
        """Flagged step indices, i.e. the predicted change points."""
        return self.ks[self.flagged]

    def __len__(self) -> int:
        return len(self.ks)

    def records(self) -> Iterator[StepRecord]:
        for i in range(len(self.ks)):
            yield StepRecord(
                k=int(self.ks[i]),
                statistic=float(self.statistic[i]),
                gamma=float(self.gamma[i]),
                flagged=bool(self.flagged[i]),
                last_change=int(self.last_change[i]),
            )


def run_detector(traj: Trajectory, cfg: DetectorConfig) -> DetectionReport:
    """Feed a recorded trajectory through the detector.

    The trajectory must supply at least 2N samples (the initial dataset plus
    one monitored step), i.e. horizon >= 2N; records cover steps
    k = 2N-1 .. horizon-1.
    """
    if traj.n != cfg.n or traj.p != cfg.p:
        raise ValueError(
            f"trajectory dimensions ({traj.n}, {traj.p}) do not match "
            f"config ({cfg.n}, {cfg.p})"
        )
    if traj.horizon < 2 * cfg.N:
        raise ValueError(
            f"trajectory too short: horizon {traj.horizon} < 2N = {2 * cfg.N}"
        )
    detector = Detector(cfg, traj.states[0])
    states, inputs = traj.states, traj.inputs
    ks, stats, gammas, flags, last = [], [], [], [], []
    for k in range(traj.horizon):
        record = detector.step(states[k + 1], inputs[k])
        if record is None:
            continue
        ks.append(record.k)
        stats.append(record.statistic)
        gammas.append(record.gamma)
        flags.append(record.flagged)
        last.append(record.last_change)
    return DetectionReport(
        ks=np.array(ks, dtype=np.int64),
        statistic=np.array(stats),
        gamma=np.array(gammas),
        flagged=np.array(flags, dtype=bool),
        last_change=np.array(last, dtype=np.int64),
    )
