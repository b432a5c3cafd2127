"""Hot numeric kernels: per-step box penetration and batched trajectory scoring.

Two interchangeable backends live here. The numba backend JIT-compiles the
per-trajectory loops; the numpy backend vectorizes the same arithmetic over
the batch axis. Selection happens once at import time:

* default: numba, when importable;
* ``NFGOPT_DISABLE_NUMBA=1`` (or ``true``/``yes``): pure numpy.

Both backends implement the same contracts. Results agree to floating-point
rounding (the numba path sums sequentially, numpy sums pairwise), so exact
reproducibility is guaranteed per backend, not across backends.

Boxes are passed as a float64 array of shape ``(n_boxes, 4)`` with columns
``t_lo, t_hi, y_lo, y_hi``. Containment is closed on all faces and the
penetration depth at a face is 0, which keeps the score continuous.

``benchmarks/backend_bench.py`` compares the two backends' throughput.
"""

from __future__ import annotations

import os

import numpy as np

_TRUTHY = {"1", "true", "yes", "on"}


def _numba_disabled() -> bool:
    return os.environ.get("NFGOPT_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _penetration_profile_numpy(values: np.ndarray, times: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """Per-step penetration score for a batch of 1-D trajectories.

    ``values`` has shape (B, m); returns (B, m) with entries <= 0. A point
    inside several boxes takes the most negative per-box depth.
    """
    s = np.zeros_like(values)
    for b in range(boxes.shape[0]):
        t_lo, t_hi, y_lo, y_hi = boxes[b]
        in_t = (times >= t_lo) & (times <= t_hi)
        inside = in_t[None, :] & (values >= y_lo) & (values <= y_hi)
        depth = np.minimum(values - y_lo, y_hi - values)
        s = np.where(inside, np.minimum(s, -depth), s)
    return s


def _avg_abs_jerk_numpy(values: np.ndarray, dt: float) -> np.ndarray:
    """Mean |third finite difference| / dt^3 over the m-3 valid windows.

    ``values`` has shape (B, m) with m >= 4; returns (B,).
    """
    d3 = values[:, 3:] - 3.0 * values[:, 2:-1] + 3.0 * values[:, 1:-2] - values[:, :-3]
    return np.abs(d3).mean(axis=1) / dt**3


def _batch_scores_numpy(
    values: np.ndarray,
    times: np.ndarray,
    boxes: np.ndarray,
    lambda_jerk: float,
    dt: float,
) -> np.ndarray:
    s = _penetration_profile_numpy(values, times, boxes)
    colliding = (s < 0.0).any(axis=1)
    penalty = s.mean(axis=1)
    bonus = np.exp(-lambda_jerk * _avg_abs_jerk_numpy(values, dt))
    return np.where(colliding, penalty, bonus)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

try:  # pragma: no cover - exercised indirectly through backend selection
    if _numba_disabled():
        raise ImportError("numba disabled via NFGOPT_DISABLE_NUMBA")
    from numba import njit

    @njit(cache=True)
    def _point_penetration(t: float, y: float, boxes: np.ndarray) -> float:
        s = 0.0
        for b in range(boxes.shape[0]):
            if t >= boxes[b, 0] and t <= boxes[b, 1] and y >= boxes[b, 2] and y <= boxes[b, 3]:
                depth = min(y - boxes[b, 2], boxes[b, 3] - y)
                if -depth < s:
                    s = -depth
        return s

    @njit(cache=True)
    def _penetration_profile_numba(values: np.ndarray, times: np.ndarray, boxes: np.ndarray) -> np.ndarray:
        out = np.zeros_like(values)
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                out[i, j] = _point_penetration(times[j], values[i, j], boxes)
        return out

    @njit(cache=True)
    def _avg_abs_jerk_numba(values: np.ndarray, dt: float) -> np.ndarray:
        n, m = values.shape
        out = np.empty(n)
        inv = 1.0 / dt**3
        for i in range(n):
            acc = 0.0
            for j in range(m - 3):
                d3 = values[i, j + 3] - 3.0 * values[i, j + 2] + 3.0 * values[i, j + 1] - values[i, j]
                acc += abs(d3)
            out[i] = acc * inv / (m - 3)
        return out

    @njit(cache=True)
    def _batch_scores_numba(
        values: np.ndarray,
        times: np.ndarray,
        boxes: np.ndarray,
        lambda_jerk: float,
        dt: float,
    ) -> np.ndarray:
        n, m = values.shape
        out = np.empty(n)
        inv = 1.0 / dt**3
        for i in range(n):
            pen_sum = 0.0
            colliding = False
            for j in range(m):
                s = _point_penetration(times[j], values[i, j], boxes)
                if s < 0.0:
                    colliding = True
                pen_sum += s
            if colliding:
                out[i] = pen_sum / m
            else:
                acc = 0.0
                for j in range(m - 3):
                    d3 = values[i, j + 3] - 3.0 * values[i, j + 2] + 3.0 * values[i, j + 1] - values[i, j]
                    acc += abs(d3)
                out[i] = np.exp(-lambda_jerk * acc * inv / (m - 3))
        return out

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


BACKEND = "numba" if HAS_NUMBA else "numpy"

if HAS_NUMBA:
    penetration_profile_batch = _penetration_profile_numba
    avg_abs_jerk_batch = _avg_abs_jerk_numba
    batch_scores = _batch_scores_numba
else:
    penetration_profile_batch = _penetration_profile_numpy
    avg_abs_jerk_batch = _avg_abs_jerk_numpy
    batch_scores = _batch_scores_numpy
