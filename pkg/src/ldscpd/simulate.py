"""Switched linear system simulation.

Generates trajectories of

    x[k+1] = A[k] x[k] + B[k] u[k] + w[k]

where the pair (A[k], B[k]) is piecewise constant in time, the input is
i.i.d. Gaussian u[k] ~ N(0, sigma_u^2 I) and the process noise is
w[k] ~ N(0, sigma_w^2 I).  A time index k >= 1 is a change point of the
schedule when the stacked matrix [A B] differs between k-1 and k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import spectral_norm


@dataclass(frozen=True)
class Segment:
    """One constant-dynamics piece, active from ``start`` onwards."""

    start: int
    A: np.ndarray
    B: np.ndarray

    @property
    def theta(self) -> np.ndarray:
        """Stacked parameter matrix [A B], shape (n, n+p)."""
        return np.hstack([self.A, self.B])


@dataclass(frozen=True)
class DynamicsSchedule:
    """Ordered piecewise-constant dynamics.

    The segment starting at index k governs the transition from x[k] to
    x[k+1].  The first segment must start at 0, starts must be strictly
    increasing, and consecutive segments must actually differ (a boundary
    with identical dynamics is not a change point and is rejected).
    """

    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        def as_b_matrix(b, n_rows: int) -> np.ndarray:
            b = np.asarray(b, dtype=np.float64)
            if b.size == 0:
                return b.reshape(n_rows, 0)
            return np.atleast_2d(b).reshape(n_rows, -1)

        segs = tuple(
            Segment(
                int(s.start),
                np.asarray(s.A, dtype=np.float64),
                as_b_matrix(s.B, np.asarray(s.A).shape[0]),
            )
            for s in self.segments
        )
        object.__setattr__(self, "segments", segs)
        first = segs[0]
        if first.start != 0:
            raise ValueError("first segment must start at index 0")
        n = first.A.shape[0]
        if first.A.shape != (n, n):
            raise ValueError(f"A must be square, got {first.A.shape}")
        p = first.B.shape[1]
        prev = first
        for seg in segs[1:]:
            if seg.start <= prev.start:
                raise ValueError("segment start indices must be strictly increasing")
            if seg.A.shape != (n, n) or seg.B.shape != (n, p):
                raise ValueError("all segments must share A, B shapes")
            if spectral_norm(prev.theta - seg.theta) <= 0.0:
                raise ValueError(
                    f"segment at {seg.start} does not change the dynamics"
                )
            prev = seg

    @property
    def n(self) -> int:
        return self.segments[0].A.shape[0]

    @property
    def p(self) -> int:
        return self.segments[0].B.shape[1]

    @property
    def change_points(self) -> list[int]:
        """Start indices of every segment after the first."""
        return [seg.start for seg in self.segments[1:]]

    def segment_at(self, k: int) -> Segment:
        if k < 0:
            raise ValueError("time index must be non-negative")
        active = self.segments[0]
        for seg in self.segments[1:]:
            if seg.start <= k:
                active = seg
            else:
                break
        return active

    def theta_at(self, k: int) -> np.ndarray:
        """[A B] of the segment whose start is the largest one <= k."""
        return self.segment_at(k).theta

    def change_magnitude(self, k: int) -> float:
        """Spectral norm of the parameter jump at k; zero inside a segment."""
        if k < 1:
            raise ValueError("change magnitude is defined for k >= 1")
        if k not in self.change_points:
            return 0.0
        return spectral_norm(self.theta_at(k - 1) - self.theta_at(k))

    def max_theta_norm(self) -> float:
        """max over segments of the spectral norm of [A B]."""
        return max(spectral_norm(seg.theta) for seg in self.segments)


@dataclass(frozen=True)
class NoiseSpec:
    """Input/process noise levels and the seed of the random stream.

    ``sigma_u`` and ``sigma_w`` may be zero for deterministic test runs;
    the detector separately rejects non-positive noise bounds, so the
    degenerate case only exists here.
    """

    sigma_u: float
    sigma_w: float
    seed: int

    def __post_init__(self):
        if self.sigma_u < 0 or self.sigma_w < 0:
            raise ValueError("noise levels must be non-negative")
        if not 0 <= int(self.seed) < 2**63:
            raise ValueError("seed must be a non-negative 64-bit integer")

    @property
    def sigma_min(self) -> float:
        return min(self.sigma_u, self.sigma_w)


@dataclass
class Trajectory:
    """A simulated or recorded run: states x[0..T], inputs u[0..T-1].

    ``noises`` is kept for simulated runs so the recursion can be replayed
    bit for bit; externally loaded trajectories may leave it None.
    """

    states: np.ndarray
    inputs: np.ndarray
    noises: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        if self.states.ndim != 2 or self.inputs.ndim != 2:
            raise ValueError("states and inputs must be 2-D arrays")
        if len(self.states) != len(self.inputs) + 1:
            raise ValueError(
                f"need len(states) == len(inputs) + 1, got "
                f"{len(self.states)} states and {len(self.inputs)} inputs"
            )
        if self.noises is not None:
            self.noises = np.asarray(self.noises, dtype=np.float64)
            if self.noises.shape != (len(self.inputs), self.states.shape[1]):
                raise ValueError("noises must have one row per transition")

    @property
    def horizon(self) -> int:
        return len(self.inputs)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def p(self) -> int:
        return self.inputs.shape[1]

    @property
    def regressors(self) -> np.ndarray:
        """Row t is z[t] = [x[t]' u[t]']', for t = 0..T-1."""
        return np.hstack([self.states[:-1], self.inputs])


def simulate(
    schedule: DynamicsSchedule,
    noise: NoiseSpec,
    horizon: int,
    x0: np.ndarray | None = None,
) -> Trajectory:
    """Run the switched recursion for ``horizon`` steps from ``x0``.

    The input stream and the process-noise stream are independent children
    of ``noise.seed`` (spawned from one seed sequence), so identical seeds
    reproduce identical draws and extending the horizon never reshuffles
    earlier samples.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    n, p = schedule.n, schedule.p
    if x0 is None:
        x0 = np.zeros(n)
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.shape != (n,):
        raise ValueError(f"x0 must have dimension {n}, got {x0.shape}")

    seq_u, seq_w = np.random.SeedSequence(int(noise.seed)).spawn(2)
    inputs = noise.sigma_u * np.random.default_rng(seq_u).standard_normal((horizon, p))
    noises = noise.sigma_w * np.random.default_rng(seq_w).standard_normal((horizon, n))

    states = np.empty((horizon + 1, n))
    states[0] = x0
    # Walk segment by segment so the inner loop has fixed (A, B).
    bounds = [seg.start for seg in schedule.segments] + [horizon]
    for seg, start, stop in zip(schedule.segments, bounds[:-1], bounds[1:]):
        A, B = seg.A, seg.B
        for k in range(start, min(stop, horizon)):
            states[k + 1] = A @ states[k] + B @ inputs[k] + noises[k]
    return Trajectory(states=states, inputs=inputs, noises=noises)


def uav_schedule() -> DynamicsSchedule:
    """Longitudinal UAV model (5 states, elevator input) with two dynamics
    changes at k = 2500 and k = 5000.

    The first change perturbs both the velocity self-coupling and the
    elevator gain; the second restores the elevator gain only, so the two
    jumps have different magnitudes.
    """
    A = np.array(
        [
            [0.9371, 0.068, -0.9507, -0.0367, 0.0],
            [-0.0085, 0.2761, -0.0207, 0.411, 0.0],
            [0.0035, -0.0164, 0.9991, 0.043, 0.0],
            [0.0548, -0.1914, -0.0253, 0.0593, 0.0],
            [-0.0086, 0.0726, -1.6984, -0.0146, 1.0],
        ]
    )
    B = np.array([[0.361], [-4.8436], [-0.3888], [-5.6967], [0.0492]])

    def perturbed(eps_a: float, eps_b: float) -> tuple[np.ndarray, np.ndarray]:
        Ak = A.copy()
        Bk = B.copy()
        Ak[0, 0] += eps_a
        Bk[0, 0] += eps_b
        return Ak, Bk

    return DynamicsSchedule(
        segments=(
            Segment(0, *perturbed(0.0, 0.0)),
            Segment(2500, *perturbed(-1.0, 2.0)),
            Segment(5000, *perturbed(-1.0, 0.0)),
        )
    )
