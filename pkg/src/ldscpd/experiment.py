"""Seeded Monte Carlo experiments over the switched-system detector.

A single experiment sweeps a list of window sizes over a set of independent
runs that share per-run trajectories (run r uses seed base_seed + r, so the
same run index always sees the same data regardless of the window size
under test).  Aggregation follows the span convention: for each change
point, the span reaches up to the step before the next change (or the end
of the horizon), the detection time of a run is the first flagged index in
the span, and a run with no flag in the span counts as a miss.  Flags
before the first change point are false alarms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import TheoryBounds, TheoryInputs, compute_bounds, recommended_delta
from .detector import DetectionReport, DetectorConfig, run_detector
from .simulate import DynamicsSchedule, NoiseSpec, simulate


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep definition; see module docstring for the seeding scheme.

    Leaving ``noise_bound``/``dynamics_bound`` unset selects tight bounds
    (the true noise level and the largest parameter norm of the schedule).
    Exactly one of ``delta_fixed`` or ``delta_scale`` must be given unless
    ``override_gamma`` replaces the data-dependent threshold entirely;
    ``delta_scale`` a means the budget a / exp(sqrt(N)) per window size N.
    """

    schedule: DynamicsSchedule
    window_sizes: tuple[int, ...]
    runs: int = 10
    horizon: int = 9000
    base_seed: int = 0
    sigma_u: float = 1.0
    sigma_w: float = 1.0
    lam: float = 1.0
    delta_fixed: float | None = None
    delta_scale: float | None = None
    noise_bound: float | None = None
    dynamics_bound: float | None = None
    override_gamma: float | None = None
    x0: np.ndarray | None = None
    beta_window: int = 100
    beta_safety: float = 1.5

    def __post_init__(self):
        object.__setattr__(
            self, "window_sizes", tuple(int(N) for N in self.window_sizes)
        )
        if not self.window_sizes:
            raise ValueError("need at least one window size")
        if any(N < 2 for N in self.window_sizes):
            raise ValueError("window sizes must be at least 2")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.horizon < 2 * max(self.window_sizes):
            raise ValueError(
                f"horizon {self.horizon} too short for the largest window "
                f"size (need at least {2 * max(self.window_sizes)})"
            )
        if self.sigma_u <= 0 or self.sigma_w <= 0:
            raise ValueError("noise levels must be positive")
        if self.lam <= 0:
            raise ValueError("regularizer must be positive")
        if self.override_gamma is None:
            given = (self.delta_fixed is not None) + (self.delta_scale is not None)
            if given != 1:
                raise ValueError(
                    "give exactly one of delta_fixed or delta_scale "
                    "(or an override_gamma)"
                )
        if (self.noise_bound is None) != (self.dynamics_bound is None):
            raise ValueError(
                "noise_bound and dynamics_bound must be given together "
                "(leave both unset for tight bounds)"
            )

    def delta_for(self, N: int) -> float | None:
        if self.override_gamma is not None:
            return None
        if self.delta_fixed is not None:
            return self.delta_fixed
        return recommended_delta(N, self.delta_scale)

    def resolved_bounds(self) -> tuple[float, float]:
        """(noise bound, dynamics bound), applying the tight-bounds rule."""
        if self.noise_bound is not None:
            return self.noise_bound, self.dynamics_bound
        return self.sigma_w, self.schedule.max_theta_norm()

    def detector_config(self, N: int) -> DetectorConfig:
        if self.override_gamma is not None:
            return DetectorConfig(
                n=self.schedule.n,
                p=self.schedule.p,
                N=N,
                lam=self.lam,
                override_gamma=self.override_gamma,
            )
        b_sw, b_th = self.resolved_bounds()
        return DetectorConfig(
            n=self.schedule.n,
            p=self.schedule.p,
            N=N,
            lam=self.lam,
            delta=self.delta_for(N),
            b_sigma_w=b_sw,
            b_theta=b_th,
        )

    def run_seed(self, run: int) -> int:
        return self.base_seed + run

    @property
    def pilot_seed(self) -> int:
        """Seed of the no-change pilot run used to estimate the state
        second-moment bound (the index right after the last run)."""
        return self.base_seed + self.runs


def estimate_second_moment_bound(
    states: np.ndarray, window: int = 100, safety: float = 1.5
) -> float:
    """Empirical cap on the windowed mean of squared state norms.

    Takes the maximum over all length-``window`` spans of the mean of
    ||x_k||^2 and inflates it by ``safety``; serves as the beta input to
    the theory bound calculators when the true second moment is unknown.
    """
    if window < 1:
        raise ValueError("window must be positive")
    if safety <= 0:
        raise ValueError("safety factor must be positive")
    energy = np.einsum("ij,ij->i", states, states)
    if len(energy) <= window:
        return safety * float(energy.mean())
    sums = np.cumsum(energy)
    spans = sums[window:] - sums[:-window]
    peak = max(float(spans.max()), float(sums[window - 1])) / window
    return safety * peak


@dataclass(frozen=True)
class SpanMetrics:
    """Detection outcomes for one change point's span, across runs."""

    change_point: int
    start: int
    end: int
    first_flags: tuple[int | None, ...]

    @property
    def detection_times(self) -> list[int]:
        return [k for k in self.first_flags if k is not None]

    @property
    def ad(self) -> float | None:
        """Average detection time over detecting runs; None if all missed."""
        times = self.detection_times
        return float(np.mean(times)) if times else None

    @property
    def md(self) -> int:
        """Number of runs with no detection in the span."""
        return sum(1 for k in self.first_flags if k is None)


@dataclass(frozen=True)
class WindowAggregate:
    """Per-window-size aggregate over all runs."""

    N: int
    delta: float | None
    spans: tuple[SpanMetrics, ...]
    false_alarm_count: int


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    beta: float
    sigma_min: float
    noise_bound: float | None
    dynamics_bound: float | None
    run_seeds: tuple[int, ...]
    aggregates: tuple[WindowAggregate, ...]
    bounds: dict[int, tuple[TheoryBounds, ...]] = field(repr=False)
    detections: dict[tuple[int, int], DetectionReport] = field(repr=False)

    def aggregate_for(self, N: int) -> WindowAggregate:
        for agg in self.aggregates:
            if agg.N == N:
                return agg
        raise KeyError(f"no aggregate for window size {N}")


def _spans(change_points: list[int], horizon: int) -> list[tuple[int, int]]:
    spans = []
    for i, cp in enumerate(change_points):
        end = change_points[i + 1] - 1 if i + 1 < len(change_points) else horizon - 1
        spans.append((cp, end))
    return spans


def _first_flag_in(report: DetectionReport, start: int, end: int) -> int | None:
    flags = report.flags
    hits = flags[(flags >= start) & (flags <= end)]
    return int(hits[0]) if len(hits) else None


def _check_flag_spacing(report: DetectionReport, N: int, key) -> None:
    # Redundant with the detector's refractory rule; a violation here means
    # the state machine is broken, so fail loudly rather than aggregate.
    flags = report.flags
    if len(flags) > 1 and int(np.diff(flags).min()) <= 2 * N - 2:
        raise RuntimeError(f"flag spacing violated in run {key}: {flags.tolist()}")


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Simulate, detect and aggregate the full sweep; deterministic in
    ``cfg.base_seed``."""
    schedule = cfg.schedule
    change_points = schedule.change_points
    spans = _spans(change_points, cfg.horizon)
    sigma_min = min(cfg.sigma_u, cfg.sigma_w)

    # No-change pilot run for the second-moment estimate.
    pilot_schedule = DynamicsSchedule(segments=(schedule.segments[0],))
    pilot = simulate(
        pilot_schedule,
        NoiseSpec(cfg.sigma_u, cfg.sigma_w, cfg.pilot_seed),
        cfg.horizon,
        cfg.x0,
    )
    beta = estimate_second_moment_bound(
        pilot.states, window=cfg.beta_window, safety=cfg.beta_safety
    )

    detections: dict[tuple[int, int], DetectionReport] = {}
    for run in range(cfg.runs):
        noise = NoiseSpec(cfg.sigma_u, cfg.sigma_w, cfg.run_seed(run))
        traj = simulate(schedule, noise, cfg.horizon, cfg.x0)
        for N in cfg.window_sizes:
            report = run_detector(traj, cfg.detector_config(N))
            _check_flag_spacing(report, N, key=(N, run))
            detections[(N, run)] = report

    first_change = change_points[0] if change_points else None
    aggregates = []
    bounds: dict[int, tuple[TheoryBounds, ...]] = {}
    for N in cfg.window_sizes:
        reports = [detections[(N, run)] for run in range(cfg.runs)]
        span_metrics = tuple(
            SpanMetrics(
                change_point=cp,
                start=start,
                end=end,
                first_flags=tuple(_first_flag_in(r, start, end) for r in reports),
            )
            for cp, (start, end) in zip(change_points, spans)
        )
        if first_change is None:
            false_alarms = sum(len(r.flags) for r in reports)
        else:
            false_alarms = sum(
                int(np.count_nonzero(r.flags < first_change)) for r in reports
            )
        aggregates.append(
            WindowAggregate(
                N=N,
                delta=cfg.delta_for(N),
                spans=span_metrics,
                false_alarm_count=false_alarms,
            )
        )
        if cfg.override_gamma is None:
            det_cfg = cfg.detector_config(N)
            bounds[N] = tuple(
                compute_bounds(
                    TheoryInputs(
                        cfg=det_cfg,
                        beta=beta,
                        sigma_u=cfg.sigma_u,
                        sigma_min=sigma_min,
                        delta_change=schedule.change_magnitude(cp),
                    )
                )
                for cp in change_points
            )
        else:
            bounds[N] = ()

    noise_bound, dynamics_bound = (
        cfg.resolved_bounds() if cfg.override_gamma is None else (None, None)
    )
    return ExperimentReport(
        config=cfg,
        beta=beta,
        sigma_min=sigma_min,
        noise_bound=noise_bound,
        dynamics_bound=dynamics_bound,
        run_seeds=tuple(cfg.run_seed(r) for r in range(cfg.runs)),
        aggregates=tuple(aggregates),
        bounds=bounds,
        detections=detections,
    )


@dataclass(frozen=True)
class FalseAlarmResult:
    """Empirical flag rates of a no-change trial for one window size."""

    N: int
    delta: float | None
    runs: int
    steps_per_run: int
    flag_count: int
    runs_with_flag: int

    @property
    def per_step_rate(self) -> float:
        return self.flag_count / (self.runs * self.steps_per_run)

    @property
    def per_run_rate(self) -> float:
        return self.runs_with_flag / self.runs


def false_alarm_trial(cfg: ExperimentConfig) -> list[FalseAlarmResult]:
    """Measure flag rates on a schedule with no change points.

    Every flag is a false alarm here; the per-step rate is the quantity the
    delta budget bounds.
    """
    if cfg.schedule.change_points:
        raise ValueError("false alarm trials need a single-segment schedule")
    results = []
    report = run_experiment(cfg)
    for N in cfg.window_sizes:
        flag_count = 0
        runs_with_flag = 0
        steps = 0
        for run in range(cfg.runs):
            flags = report.detections[(N, run)].flags
            flag_count += len(flags)
            runs_with_flag += bool(len(flags))
            steps = len(report.detections[(N, run)])
        results.append(
            FalseAlarmResult(
                N=N,
                delta=cfg.delta_for(N),
                runs=cfg.runs,
                steps_per_run=steps,
                flag_count=flag_count,
                runs_with_flag=runs_with_flag,
            )
        )
    return results


def _format_float(x: float) -> str:
    """Shortest representation that round-trips in double precision."""
    return repr(float(x))


def emit_table(report: ExperimentReport) -> tuple[str, str]:
    """Render the per-window-size metrics as (CSV text, aligned text).

    Columns: N, delta, then AD/MD pairs per change-point span; AD cells
    read N/A when every run missed the span.
    """
    q = len(report.config.schedule.change_points)
    header = ["N", "delta"]
    for i in range(1, q + 1):
        header += [f"AD{i}", f"MD{i}"]
    csv_rows = [",".join(header)]
    text_rows = [header]
    for agg in report.aggregates:
        delta_cell = "" if agg.delta is None else _format_float(agg.delta)
        row = [str(agg.N), delta_cell]
        text_row = [str(agg.N), "" if agg.delta is None else f"{agg.delta:.2g}"]
        for span in agg.spans:
            ad = span.ad
            row += ["N/A" if ad is None else _format_float(ad), str(span.md)]
            text_row += ["N/A" if ad is None else f"{ad:.1f}", str(span.md)]
        csv_rows.append(",".join(row))
        text_rows.append(text_row)
    widths = [max(len(r[i]) for r in text_rows) for i in range(len(header))]
    text = "\n".join(
        "  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in text_rows
    )
    return "\n".join(csv_rows) + "\n", text + "\n"


def emit_figure_data(reports: list[DetectionReport]) -> str:
    """Average statistic and threshold across runs, as CSV over steps.

    All reports must cover the same step range (same window size and
    horizon).
    """
    if not reports:
        raise ValueError("need at least one detection report")
    ks = reports[0].ks
    for r in reports[1:]:
        if len(r.ks) != len(ks) or not np.array_equal(r.ks, ks):
            raise ValueError("reports cover different step ranges")
    mean_stat = np.mean([r.statistic for r in reports], axis=0)
    mean_gamma = np.mean([r.gamma for r in reports], axis=0)
    lines = ["k,mean_statistic,mean_gamma"]
    for k, s, g in zip(ks, mean_stat, mean_gamma):
        lines.append(f"{k},{_format_float(s)},{_format_float(g)}")
    return "\n".join(lines) + "\n"
