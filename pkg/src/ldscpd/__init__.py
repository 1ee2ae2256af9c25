"""Online change point detection for linear dynamical systems.

Simulates switched linear systems with Gaussian input and process noise,
monitors streams with a pair of sliding ridge-regression windows compared
through a data-dependent threshold, evaluates finite-sample guarantee
quantities, and reproduces the reference Monte Carlo experiments.
"""

from .bounds import (
    TheoryBounds,
    TheoryInputs,
    compute_bounds,
    recommended_delta,
    sufficiently_separated,
)
from .detector import (
    DetectionReport,
    Detector,
    DetectorConfig,
    StepRecord,
    rls_estimate,
    run_detector,
    spectral_norm_diff,
    threshold,
)
from .estimator import OnlineChangePointDetector, validate_trajectory_arrays
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    FalseAlarmResult,
    emit_figure_data,
    emit_table,
    estimate_second_moment_bound,
    false_alarm_trial,
    run_experiment,
)
from .simulate import (
    DynamicsSchedule,
    NoiseSpec,
    Segment,
    Trajectory,
    simulate,
    uav_schedule,
)
from .windows import WindowState, build_window

__version__ = "0.1.0"

__all__ = [
    "DetectionReport",
    "Detector",
    "DetectorConfig",
    "DynamicsSchedule",
    "ExperimentConfig",
    "ExperimentReport",
    "FalseAlarmResult",
    "NoiseSpec",
    "OnlineChangePointDetector",
    "Segment",
    "StepRecord",
    "TheoryBounds",
    "TheoryInputs",
    "Trajectory",
    "WindowState",
    "build_window",
    "compute_bounds",
    "emit_figure_data",
    "emit_table",
    "estimate_second_moment_bound",
    "false_alarm_trial",
    "recommended_delta",
    "rls_estimate",
    "run_detector",
    "run_experiment",
    "simulate",
    "spectral_norm_diff",
    "sufficiently_separated",
    "threshold",
    "uav_schedule",
    "validate_trajectory_arrays",
    "__version__",
]
