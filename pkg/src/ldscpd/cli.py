"""Command line front end.

Subcommands:

    simulate       generate a trajectory CSV from a simulation config
    detect         run the detector over a trajectory CSV
    experiment     run a Monte Carlo sweep and write its output files
    reproduce-uav  the built-in UAV sweep with standard settings

Configs are JSON; see the README for the schemas.  Exits with status 2 on
validation errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .detector import run_detector
from .experiment import ExperimentConfig, emit_figure_data, emit_table, run_experiment
from .simulate import simulate, uav_schedule


def _cmd_simulate(args) -> int:
    data = io.load_json(args.config)
    schedule, noise, horizon, x0 = io.sim_config_from_dict(data)
    if args.horizon is not None:
        horizon = args.horizon
    if horizon is None:
        raise ValueError("no horizon: set 'horizon' in the config or pass --horizon")
    traj = simulate(schedule, noise, horizon, x0)
    io.save_trajectory(traj, args.out)
    print(f"wrote {args.out} ({traj.horizon} steps, n={traj.n}, p={traj.p})")
    return 0


def _cmd_detect(args) -> int:
    data = io.load_json(args.config)
    if "detector" not in data:
        raise ValueError("config has no 'detector' section")
    traj = io.load_trajectory(args.traj)
    cfg = io.detector_config_from_dict(data["detector"], n=traj.n, p=traj.p)
    report = run_detector(traj, cfg)
    io.save_report(report, args.out)
    flags = ", ".join(str(k) for k in report.flags) or "none"
    print(f"wrote {args.out} ({len(report)} monitored steps; flags: {flags})")
    return 0


def _write_experiment_outputs(report, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    table_csv, table_txt = emit_table(report)
    (out_dir / "table.csv").write_text(table_csv, encoding="utf-8")
    (out_dir / "table.txt").write_text(table_txt, encoding="utf-8")
    cfg = report.config
    for N in cfg.window_sizes:
        reports = [report.detections[(N, run)] for run in range(cfg.runs)]
        (out_dir / f"figure_N{N}.csv").write_text(
            emit_figure_data(reports), encoding="utf-8"
        )
    io.dump_json(io.bounds_to_dict(report), out_dir / "bounds.json")


def _cmd_experiment(args) -> int:
    data = io.load_json(args.config)
    if "experiment" not in data:
        raise ValueError("config has no 'experiment' section")
    cfg = io.experiment_config_from_dict(data["experiment"])
    report = run_experiment(cfg)
    _write_experiment_outputs(report, Path(args.out_dir))
    print(f"wrote experiment outputs to {args.out_dir}")
    return 0


def _cmd_reproduce_uav(args) -> int:
    cfg = ExperimentConfig(
        schedule=uav_schedule(),
        window_sizes=(50, 150, 250, 350, 450),
        runs=args.runs,
        horizon=9000,
        base_seed=args.seed,
        sigma_u=1.0,
        sigma_w=1.0,
        lam=1.0,
        delta_scale=1000.0,
    )
    report = run_experiment(cfg)
    _write_experiment_outputs(report, Path(args.out_dir))
    _, table_txt = emit_table(report)
    print(table_txt, end="")
    print(f"wrote experiment outputs to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldscpd",
        description="Online change point detection for linear dynamical systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a trajectory CSV")
    p_sim.add_argument("--config", required=True, help="simulation config (JSON)")
    p_sim.add_argument("--out", required=True, help="output trajectory CSV")
    p_sim.add_argument("--horizon", type=int, help="override the config horizon")
    p_sim.set_defaults(func=_cmd_simulate)

    p_det = sub.add_parser("detect", help="run the detector over a trajectory")
    p_det.add_argument("--config", required=True, help="config with a 'detector' section")
    p_det.add_argument("--traj", required=True, help="input trajectory CSV")
    p_det.add_argument("--out", required=True, help="output report CSV")
    p_det.set_defaults(func=_cmd_detect)

    p_exp = sub.add_parser("experiment", help="run a Monte Carlo sweep")
    p_exp.add_argument("--config", required=True, help="config with an 'experiment' section")
    p_exp.add_argument("--out-dir", required=True, help="output directory")
    p_exp.set_defaults(func=_cmd_experiment)

    p_uav = sub.add_parser(
        "reproduce-uav", help="built-in UAV sweep (N=50..450, 10 runs, 9000 steps)"
    )
    p_uav.add_argument("--seed", type=int, default=12345, help="base seed")
    p_uav.add_argument("--runs", type=int, default=10, help="independent runs")
    p_uav.add_argument("--out-dir", required=True, help="output directory")
    p_uav.set_defaults(func=_cmd_reproduce_uav)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
