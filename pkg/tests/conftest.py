import numpy as np
import pytest

from ldscpd import DynamicsSchedule, NoiseSpec, Segment, simulate


@pytest.fixture
def stable_system():
    """Small strictly stable single-segment system (n=2, p=1)."""
    A = np.array([[0.9, 0.1], [0.0, 0.8]])
    B = np.array([[0.5], [1.0]])
    return DynamicsSchedule(segments=(Segment(0, A, B),))


@pytest.fixture
def switching_system():
    """n=2, p=1 system with one clear change at k=60."""
    A = np.array([[0.9, 0.1], [0.0, 0.8]])
    B = np.array([[0.5], [1.0]])
    A2 = np.array([[0.2, 0.1], [0.0, 0.8]])
    B2 = np.array([[0.5], [-1.0]])
    return DynamicsSchedule(segments=(Segment(0, A, B), Segment(60, A2, B2)))


def make_pairs(rng, width, d, n):
    """Random (regressor, label) pairs for window tests."""
    return [
        (rng.standard_normal(d), rng.standard_normal(n)) for _ in range(width)
    ]


def stacked_window_sums(pairs):
    """From-scratch gram/cross by explicit stacking."""
    Z = np.array([z for z, _ in pairs])
    X = np.array([x for _, x in pairs])
    return Z.T @ Z, X.T @ Z


def stacked_ridge_fit(pairs, lam):
    """Naive closed form cross @ inv(gram + lam I) with a dense inverse."""
    gram, cross = stacked_window_sums(pairs)
    return cross @ np.linalg.inv(gram + lam * np.eye(gram.shape[0]))


def window_pairs_from_trajectory(traj, t_lo, t_hi):
    """(z_t, x_{t+1}) pairs for t in [t_lo, t_hi] inclusive."""
    z = traj.regressors
    return [(z[t], traj.states[t + 1]) for t in range(t_lo, t_hi + 1)]


def oracle_window_estimates(traj, k, N, lam):
    """Both window fits at step k, built by stacking and dense inversion.

    Reference window: t in [k-2N+2, k-N]; test window: t in [k-N+2, k].
    """
    ref = stacked_ridge_fit(window_pairs_from_trajectory(traj, k - 2 * N + 2, k - N), lam)
    test = stacked_ridge_fit(window_pairs_from_trajectory(traj, k - N + 2, k), lam)
    return ref, test


def char_poly_min_eig(mat):
    """Smallest eigenvalue via Faddeev-LeVerrier coefficients and np.roots.

    Independent of the symmetric eigensolver used by the library code.
    """
    d = mat.shape[0]
    coeffs = np.zeros(d + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(mat)
    for i in range(1, d + 1):
        M = mat @ M + coeffs[i - 1] * np.eye(d)
        coeffs[i] = -np.trace(mat @ M) / i
    roots = np.roots(coeffs)
    return float(np.min(roots.real))


def power_iteration_norm(mat, iters=20000, tol=1e-15):
    """Spectral norm via power iteration on mat' mat."""
    gram = mat.T @ mat
    v = np.ones(gram.shape[0]) / np.sqrt(gram.shape[0])
    prev = 0.0
    for _ in range(iters):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - prev) <= tol * norm:
            break
        prev = norm
    return float(np.sqrt(v @ gram @ v))


def short_run(schedule, seed, horizon, **noise):
    levels = NoiseSpec(noise.get("sigma_u", 1.0), noise.get("sigma_w", 1.0), seed)
    return simulate(schedule, levels, horizon)
