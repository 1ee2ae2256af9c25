"""Sliding-window regressor/label summaries.

A window of width w holds the w most recent (z, x_next) pairs and maintains

    gram  = sum of z z'        (d x d, symmetric PSD)
    cross = sum of x_next z'   (n x d)

incrementally: each slide adds the incoming rank-one term and subtracts the
evicted one.  Subtraction slowly accumulates roundoff, so the sums are
rebuilt from the ring every ``rebuild_every`` slides, which keeps the
incremental state within 1e-8 relative Frobenius error of a from-scratch
computation.  Downdating factorizations or inverses is deliberately avoided;
solves happen against the current sums, which is cheap at these dimensions.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .linalg import check_symmetric, spd_logdet_ratio, sym_min_eig

DEFAULT_REBUILD_EVERY = 512


class WindowState:
    """Single-owner mutable summary of one sliding window.

    Parameters
    ----------
    pairs:
        The initial ring contents, ordered oldest to newest; each element is
        a (regressor, next_state) pair.  The window width is len(pairs) and
        stays fixed.
    rebuild_every:
        Number of slides between from-scratch recomputations of the sums.
    """

    def __init__(
        self,
        pairs: Sequence[tuple[np.ndarray, np.ndarray]] | Iterable,
        rebuild_every: int = DEFAULT_REBUILD_EVERY,
    ):
        pairs = [
            (np.asarray(z, dtype=np.float64), np.asarray(x, dtype=np.float64))
            for z, x in pairs
        ]
        if not pairs:
            raise ValueError("a window needs at least one (z, x_next) pair")
        d = pairs[0][0].shape
        n = pairs[0][1].shape
        if len(d) != 1 or len(n) != 1:
            raise ValueError("regressors and labels must be 1-D vectors")
        for z, x in pairs:
            if z.shape != d or x.shape != n:
                raise ValueError("inconsistent pair dimensions")
        if rebuild_every < 1:
            raise ValueError("rebuild_every must be positive")
        self.width = len(pairs)
        self.rebuild_every = int(rebuild_every)
        self.ring: deque[tuple[np.ndarray, np.ndarray]] = deque(
            pairs, maxlen=len(pairs)
        )
        self.steps_since_rebuild = 0
        self.gram = np.empty((d[0], d[0]))
        self.cross = np.empty((n[0], d[0]))
        self.rebuild()

    @property
    def dim(self) -> int:
        """Regressor dimension d = n + p."""
        return self.gram.shape[0]

    def rebuild(self) -> None:
        """Recompute gram and cross from the ring by direct summation."""
        Z = np.array([z for z, _ in self.ring])
        X = np.array([x for _, x in self.ring])
        self.gram[:] = Z.T @ Z
        self.cross[:] = X.T @ Z
        self.steps_since_rebuild = 0

    def slide(self, z: np.ndarray, x_next: np.ndarray) -> None:
        """Replace the oldest pair with (z, x_next) and update the sums."""
        z = np.asarray(z, dtype=np.float64)
        x_next = np.asarray(x_next, dtype=np.float64)
        z_old, x_old = self.ring[0]
        self.ring.append((z, x_next))
        self.gram += np.outer(z, z)
        self.gram -= np.outer(z_old, z_old)
        self.cross += np.outer(x_next, z)
        self.cross -= np.outer(x_old, z_old)
        self.steps_since_rebuild += 1
        if self.steps_since_rebuild >= self.rebuild_every:
            self.rebuild()

    def min_eig_regularized(self, lam: float) -> float:
        """Smallest eigenvalue of gram + lam * I (symmetric eigensolve)."""
        if lam <= 0:
            raise ValueError("regularizer must be positive")
        check_symmetric(self.gram)
        return sym_min_eig(self.gram + lam * np.eye(self.dim))

    def logdet_vbar(self, lam: float) -> float:
        """log det((gram + lam I) / lam), i.e. the log volume ratio between
        the regularized window and the bare regularizer.

        Never negative; roundoff at huge ``lam`` is clamped to zero.
        """
        if lam <= 0:
            raise ValueError("regularizer must be positive")
        check_symmetric(self.gram)
        value = spd_logdet_ratio(self.gram + lam * np.eye(self.dim), lam)
        return max(value, 0.0)

    def debug_csv(self) -> str:
        """Dump gram and cross as labelled CSV rows, for inspection."""
        lines = []
        for name, mat in (("gram", self.gram), ("cross", self.cross)):
            for i, row in enumerate(mat):
                cells = ",".join(repr(float(v)) for v in row)
                lines.append(f"{name},{i},{cells}")
        return "\n".join(lines) + "\n"


def build_window(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    rebuild_every: int = DEFAULT_REBUILD_EVERY,
) -> WindowState:
    """Construct a window from scratch; see :class:`WindowState`."""
    return WindowState(pairs, rebuild_every=rebuild_every)
