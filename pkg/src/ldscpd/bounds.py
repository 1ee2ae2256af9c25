"""Finite-sample guarantee calculators.

These evaluate the closed-form quantities that bound the detector's
behavior: the window energy constant ``c1``, the noise-uncertainty term
``delta_e`` entering the true-alarm lower bound, the minimum window size
``n1`` for the excitation argument, and the regularizer cap.  The bounds
are only meaningful when their side conditions hold; out-of-regime inputs
never raise, they simply report ``conditions_met = False`` together with
the (possibly vacuous) values so experiments can show where the theory
stops applying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detector import DetectorConfig
from .simulate import DynamicsSchedule

_LOG9 = math.log(9.0)


@dataclass(frozen=True)
class TheoryInputs:
    """Everything the bound formulas need beyond the detector config.

    ``beta`` bounds the state second moment (trace of E[x x']), estimated
    by the experiment harness, and ``sigma_min`` is the smaller of the true
    noise and input levels; both describe the data-generating system, not
    the detector.  ``delta_change`` is the spectral norm of the parameter
    jump under study.
    """

    cfg: DetectorConfig
    beta: float
    sigma_u: float
    sigma_min: float
    delta_change: float

    def __post_init__(self):
        if self.cfg.delta is None or self.cfg.b_sigma_w is None or self.cfg.b_theta is None:
            raise ValueError("theory bounds need a guarantees-mode detector config")
        for name in ("beta", "sigma_u", "sigma_min", "delta_change"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TheoryBounds:
    """Computed bound quantities; see :func:`compute_bounds`."""

    c1: float
    delta_e: float
    n1: float
    n_floor: float
    lambda_cap: float
    true_alarm_lower: float
    conditions_met: bool


def compute_bounds(inp: TheoryInputs) -> TheoryBounds:
    """Evaluate the guarantee quantities at the given operating point.

    ``true_alarm_lower`` = 1 - (2N+1) delta - delta_e may be negative
    (a vacuous bound) and is reported as-is.
    """
    cfg = inp.cfg
    N, lam, delta = cfg.N, cfg.lam, cfg.delta
    b_sw, b_th = cfg.b_sigma_w, cfg.b_theta
    d = cfg.dim
    dc = inp.delta_change
    smin2 = inp.sigma_min**2

    c1 = (N - 1) * (inp.beta + inp.sigma_u**2 * cfg.p)
    log_term = cfg.n * _LOG9 + math.log(2.0 / delta)
    energy = N * smin2 + 42.0 * lam

    arg = dc * math.sqrt(energy / (10000.0 * b_sw**2 * d)) - math.sqrt(log_term / d)
    with np.errstate(over="ignore", under="ignore"):
        delta_e = float(8.0 * c1 / lam * np.exp(-arg))
    lambda_cap = math.inf if delta_e == 0.0 else 4.0 * c1 / (math.e * delta_e)

    n1 = (
        200.0
        * d
        * (
            math.log(7.0 * lam / c1)
            + dc * math.sqrt(energy / (2500.0 * b_sw**2 * d))
            - 168.0 * lam * b_th / math.sqrt(2500.0 * b_sw**2 * d * energy)
        )
    )
    n_floor = max(42.0, n1, 336.0 * lam * b_th / (dc * smin2) - 42.0 * lam / smin2)
    conditions_met = N >= n_floor and lam <= lambda_cap
    true_alarm_lower = 1.0 - (2 * N + 1) * delta - delta_e

    return TheoryBounds(
        c1=c1,
        delta_e=delta_e,
        n1=n1,
        n_floor=n_floor,
        lambda_cap=lambda_cap,
        true_alarm_lower=true_alarm_lower,
        conditions_met=conditions_met,
    )


def sufficiently_separated(
    schedule: DynamicsSchedule, N: int
) -> list[tuple[int, bool]]:
    """Classify each change point of the schedule as sufficiently separated.

    A change point needs a gap of at least 4N-1 steps from its predecessor
    (time 0 counts as the predecessor of the first) and, unless it is the
    last one, from its successor.
    """
    if N < 2:
        raise ValueError("window parameter N must be at least 2")
    gap = 4 * N - 1
    points = schedule.change_points
    result = []
    for i, k in enumerate(points):
        prev = points[i - 1] if i > 0 else 0
        ok = (k - prev) >= gap
        if i + 1 < len(points):
            ok = ok and (points[i + 1] - k) >= gap
        result.append((k, ok))
    return result


def recommended_delta(N: int, a: float) -> float:
    """False-alarm budget a / exp(sqrt(N)), clipped just below 1.

    Scaling the budget this way makes both uncertainty terms of the
    true-alarm bound shrink as the window grows, at the price of delay.
    """
    if N < 2:
        raise ValueError("window parameter N must be at least 2")
    if a <= 0:
        raise ValueError("scale a must be positive")
    return min(a / math.exp(math.sqrt(N)), 1.0 - 1e-12)
