"""Limited-memory BFGS buffer applied to the forward-backward residual."""

from __future__ import annotations

from collections import deque

import numpy as np

from sapsim.dynamics.models import FloatArray

CURVATURE_EPS = 1e-10


class LbfgsBuffer:
    """Two-loop recursion over the most recent ``(s, y)`` pairs.

    Pairs failing the cautious curvature test ``s^T y > eps ||s||^2`` are
    skipped, which keeps the implicit Hessian estimate positive definite.
    """

    def __init__(self, memory: int) -> None:
        self.memory = memory
        self._pairs: deque[tuple[FloatArray, FloatArray, float]] = deque(maxlen=memory)

    def __len__(self) -> int:
        return len(self._pairs)

    def reset(self) -> None:
        """Drop all stored pairs."""
        self._pairs.clear()

    def push(self, s: FloatArray, y: FloatArray) -> bool:
        """Store a pair, returning whether it passed the curvature test."""
        sy = float(s @ y)
        if not sy > CURVATURE_EPS * float(s @ s):
            return False
        self._pairs.append((s.copy(), y.copy(), 1.0 / sy))
        return True

    def apply(self, q: FloatArray) -> FloatArray:
        """Approximate inverse-Hessian product ``H q``."""
        if not self._pairs:
            return q.copy()
        out = q.copy()
        alphas = []
        for s, y, rho in reversed(self._pairs):
            alpha = rho * float(s @ out)
            out -= alpha * y
            alphas.append(alpha)
        _, y_last, rho_last = self._pairs[-1]
        out *= 1.0 / (rho_last * float(y_last @ y_last))
        for (s, y, rho), alpha in zip(self._pairs, reversed(alphas), strict=True):
            beta = rho * float(y @ out)
            out += (alpha - beta) * s
        return np.asarray(out)
