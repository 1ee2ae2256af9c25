"""File formats: JSON configs, trajectory/report CSV, experiment outputs.

All floating point values are written with ``repr``, the shortest string
that round-trips the exact double, so identical configurations always
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .detector import DetectionReport, DetectorConfig
from .experiment import ExperimentConfig, ExperimentReport
from .simulate import DynamicsSchedule, NoiseSpec, Segment, Trajectory, uav_schedule


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Schedule / simulation config (JSON)
# ---------------------------------------------------------------------------

def schedule_to_dict(schedule: DynamicsSchedule) -> dict[str, Any]:
    return {
        "n": schedule.n,
        "p": schedule.p,
        "segments": [
            {
                "start": seg.start,
                "A": [float(v) for v in seg.A.ravel()],
                "B": [float(v) for v in seg.B.ravel()],
            }
            for seg in schedule.segments
        ],
    }


def schedule_from_dict(data: dict[str, Any]) -> DynamicsSchedule:
    try:
        n = int(data["n"])
        p = int(data["p"])
        raw_segments = data["segments"]
    except KeyError as exc:
        raise ValueError(f"schedule config is missing key {exc}") from None
    segments = []
    for i, seg in enumerate(raw_segments):
        try:
            a = np.array(seg["A"], dtype=np.float64).reshape(n, n)
            b = np.array(seg["B"], dtype=np.float64).reshape(n, p)
            segments.append(Segment(int(seg["start"]), a, b))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"segment {i} is malformed: {exc}") from None
    return DynamicsSchedule(segments=tuple(segments))


def sim_config_to_dict(
    schedule: DynamicsSchedule,
    noise: NoiseSpec,
    horizon: int | None = None,
    x0: np.ndarray | None = None,
) -> dict[str, Any]:
    data = schedule_to_dict(schedule)
    data["sigma_u"] = noise.sigma_u
    data["sigma_w"] = noise.sigma_w
    data["seed"] = noise.seed
    if horizon is not None:
        data["horizon"] = int(horizon)
    if x0 is not None:
        data["x0"] = [float(v) for v in np.asarray(x0).ravel()]
    return data


def sim_config_from_dict(
    data: dict[str, Any],
) -> tuple[DynamicsSchedule, NoiseSpec, int | None, np.ndarray | None]:
    schedule = schedule_from_dict(data)
    for key in ("sigma_u", "sigma_w", "seed"):
        if key not in data:
            raise ValueError(f"simulation config is missing key '{key}'")
    noise = NoiseSpec(
        sigma_u=float(data["sigma_u"]),
        sigma_w=float(data["sigma_w"]),
        seed=int(data["seed"]),
    )
    horizon = int(data["horizon"]) if "horizon" in data else None
    x0 = np.array(data["x0"], dtype=np.float64) if "x0" in data else None
    return schedule, noise, horizon, x0


def load_json(path: str | Path) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a JSON object")
    return data


def dump_json(data: dict[str, Any], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Detector config (JSON fragment)
# ---------------------------------------------------------------------------

def detector_config_from_dict(
    data: dict[str, Any], n: int, p: int
) -> DetectorConfig:
    """Build a detector config from the 'detector' section of a config file.

    Recognized keys: N, lambda, delta, b_sigma_w, b_theta, override_gamma,
    rebuild_every.
    """
    if "N" not in data:
        raise ValueError("detector config is missing key 'N'")
    if "lambda" not in data:
        raise ValueError("detector config is missing key 'lambda'")

    def opt(key):
        value = data.get(key)
        return None if value is None else float(value)

    kwargs = dict(
        n=n,
        p=p,
        N=int(data["N"]),
        lam=float(data["lambda"]),
        delta=opt("delta"),
        b_sigma_w=opt("b_sigma_w"),
        b_theta=opt("b_theta"),
        override_gamma=opt("override_gamma"),
    )
    if "rebuild_every" in data:
        kwargs["rebuild_every"] = int(data["rebuild_every"])
    return DetectorConfig(**kwargs)


# ---------------------------------------------------------------------------
# Experiment config (JSON)
# ---------------------------------------------------------------------------

def experiment_config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build an experiment config from the 'experiment' section.

    'schedule' is either the string "uav" or an inline schedule object
    (keys n, p, segments).  'delta' is either a number (fixed budget) or
    {"a": value} for the a/exp(sqrt(N)) rule.  'bounds' is either "tight"
    or {"b_sigma_w": ..., "b_theta": ...}.
    """
    if "schedule" not in data:
        raise ValueError("experiment config is missing key 'schedule'")
    raw_schedule = data["schedule"]
    if raw_schedule == "uav":
        schedule = uav_schedule()
    elif isinstance(raw_schedule, dict):
        schedule = schedule_from_dict(raw_schedule)
    else:
        raise ValueError("schedule must be \"uav\" or an inline schedule object")

    if "N_list" not in data:
        raise ValueError("experiment config is missing key 'N_list'")

    delta_fixed = delta_scale = None
    override_gamma = data.get("override_gamma")
    if override_gamma is None:
        if "delta" not in data:
            raise ValueError("experiment config is missing key 'delta'")
        raw_delta = data["delta"]
        if isinstance(raw_delta, dict):
            if set(raw_delta) != {"a"}:
                raise ValueError("delta rule object must have exactly the key 'a'")
            delta_scale = float(raw_delta["a"])
        else:
            delta_fixed = float(raw_delta)

    noise_bound = dynamics_bound = None
    raw_bounds = data.get("bounds", "tight")
    if raw_bounds != "tight":
        if not isinstance(raw_bounds, dict) or set(raw_bounds) != {
            "b_sigma_w",
            "b_theta",
        }:
            raise ValueError(
                "bounds must be \"tight\" or {\"b_sigma_w\": ..., \"b_theta\": ...}"
            )
        noise_bound = float(raw_bounds["b_sigma_w"])
        dynamics_bound = float(raw_bounds["b_theta"])

    kwargs: dict[str, Any] = dict(
        schedule=schedule,
        window_sizes=tuple(int(v) for v in data["N_list"]),
        delta_fixed=delta_fixed,
        delta_scale=delta_scale,
        noise_bound=noise_bound,
        dynamics_bound=dynamics_bound,
        override_gamma=None if override_gamma is None else float(override_gamma),
    )
    for key, cast in (
        ("runs", int),
        ("horizon", int),
        ("base_seed", int),
        ("sigma_u", float),
        ("sigma_w", float),
        ("beta_window", int),
        ("beta_safety", float),
    ):
        if key in data:
            kwargs[key] = cast(data[key])
    if "lambda" in data:
        kwargs["lam"] = float(data["lambda"])
    if "x0" in data:
        kwargs["x0"] = np.array(data["x0"], dtype=np.float64)
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Trajectory CSV
# ---------------------------------------------------------------------------

def trajectory_to_csv(traj: Trajectory) -> str:
    """Columns k, x_1..x_n, u_1..u_p; the final state row has empty inputs."""
    header = (
        ["k"]
        + [f"x_{i}" for i in range(1, traj.n + 1)]
        + [f"u_{j}" for j in range(1, traj.p + 1)]
    )
    lines = [",".join(header)]
    for k in range(traj.horizon):
        cells = [str(k)]
        cells += [_fmt(v) for v in traj.states[k]]
        cells += [_fmt(v) for v in traj.inputs[k]]
        lines.append(",".join(cells))
    cells = [str(traj.horizon)]
    cells += [_fmt(v) for v in traj.states[traj.horizon]]
    cells += [""] * traj.p
    lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def trajectory_from_csv(text: str) -> Trajectory:
    reader = csv.reader(text.strip().splitlines())
    header = next(reader, None)
    if not header or header[0] != "k":
        raise ValueError("trajectory CSV must start with a 'k,x_1,...' header")
    n = sum(1 for name in header if name.startswith("x_"))
    p = sum(1 for name in header if name.startswith("u_"))
    if n == 0 or len(header) != 1 + n + p:
        raise ValueError("trajectory CSV header must list x_* then u_* columns")
    states, inputs = [], []
    for row in reader:
        if len(row) != len(header):
            raise ValueError(f"row {row[:1]} has {len(row)} cells, expected {len(header)}")
        states.append([float(v) for v in row[1 : 1 + n]])
        u_cells = row[1 + n :]
        if any(c != "" for c in u_cells):
            inputs.append([float(v) for v in u_cells])
    if p == 0:
        # Autonomous series: every row is state-only.
        inputs = [[] for _ in range(len(states) - 1)]
    if len(states) != len(inputs) + 1:
        raise ValueError(
            "trajectory CSV must contain one final state row with empty inputs"
        )
    return Trajectory(
        states=np.array(states, dtype=np.float64),
        inputs=np.array(inputs, dtype=np.float64).reshape(len(inputs), p),
    )


def save_trajectory(traj: Trajectory, path: str | Path) -> None:
    Path(path).write_text(trajectory_to_csv(traj), encoding="utf-8")


def load_trajectory(path: str | Path) -> Trajectory:
    return trajectory_from_csv(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Detection report CSV
# ---------------------------------------------------------------------------


def report_to_csv(report: DetectionReport) -> str:
    lines = ["k,statistic,gamma,flagged,S_k"]
    for i in range(len(report)):
        lines.append(
            ",".join(
                [
                    str(int(report.ks[i])),
                    _fmt(report.statistic[i]),
                    _fmt(report.gamma[i]),
                    str(int(report.flagged[i])),
                    str(int(report.last_change[i])),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def save_report(report: DetectionReport, path: str | Path) -> None:
    Path(path).write_text(report_to_csv(report), encoding="utf-8")


# ---------------------------------------------------------------------------
# Experiment outputs
# ---------------------------------------------------------------------------


def _finite_or_none(x: float) -> float | None:
    # Strict JSON has no Infinity; an unbounded cap is reported as null.
    return float(x) if math.isfinite(x) else None


def bounds_to_dict(report: ExperimentReport) -> dict[str, Any]:
    cfg = report.config
    per_window: dict[str, Any] = {}
    for agg in report.aggregates:
        entries = []
        for cp, b in zip(cfg.schedule.change_points, report.bounds[agg.N]):
            entries.append(
                {
                    "change_point": cp,
                    "change_magnitude": cfg.schedule.change_magnitude(cp),
                    "c1": b.c1,
                    "delta_e": _finite_or_none(b.delta_e),
                    "n1": b.n1,
                    "n_floor": b.n_floor,
                    "lambda_cap": _finite_or_none(b.lambda_cap),
                    "true_alarm_lower": _finite_or_none(b.true_alarm_lower),
                    "conditions_met": b.conditions_met,
                }
            )
        per_window[str(agg.N)] = {
            "delta": agg.delta,
            "false_alarm_count": agg.false_alarm_count,
            "change_points": entries,
        }
    return {
        "beta": report.beta,
        "beta_window": cfg.beta_window,
        "beta_safety": cfg.beta_safety,
        "sigma_u": cfg.sigma_u,
        "sigma_w": cfg.sigma_w,
        "sigma_min": report.sigma_min,
        "noise_bound": report.noise_bound,
        "dynamics_bound": report.dynamics_bound,
        "lambda": cfg.lam,
        "horizon": cfg.horizon,
        "runs": cfg.runs,
        "base_seed": cfg.base_seed,
        "run_seeds": list(report.run_seeds),
        "pilot_seed": cfg.pilot_seed,
        "per_window": per_window,
    }
