"""Axis-aligned box environment and trajectory scoring.

A 1-D trajectory y(t) is scored against rectangular obstacle regions in
the (t, y) plane. Each grid point inside a box contributes a non-positive
penetration value; a trajectory that touches no box interior earns a
smoothness bonus in (0, 1] instead. The two regimes never overlap, so any
collision-free trajectory outscores every colliding one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError
from .trajectory import Trajectory

EXP_CLAMP = 700.0


@dataclass(frozen=True)
class BoxObstacle:
    """Rectangle [t_lo, t_hi] x [y_lo, y_hi]; containment is closed on all faces."""

    t_lo: float
    t_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.t_lo) and np.isfinite(self.t_hi) and self.t_lo < self.t_hi):
            raise ConfigError(f"need t_lo < t_hi, got [{self.t_lo}, {self.t_hi}]")
        if not (np.isfinite(self.y_lo) and np.isfinite(self.y_hi) and self.y_lo < self.y_hi):
            raise ConfigError(f"need y_lo < y_hi, got [{self.y_lo}, {self.y_hi}]")


@dataclass(frozen=True)
class BoxEnvironment:
    """A set of box obstacles; empty means free space."""

    boxes: tuple[BoxObstacle, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))

    def as_array(self) -> np.ndarray:
        """Boxes as an (n, 4) array with columns t_lo, t_hi, y_lo, y_hi."""
        return np.array(
            [[b.t_lo, b.t_hi, b.y_lo, b.y_hi] for b in self.boxes], dtype=np.float64
        ).reshape(len(self.boxes), 4)

    @staticmethod
    def from_config(spec: str | list) -> BoxEnvironment:
        """Build from a preset name or a list of box records.

        Each record is a mapping with keys t_lo, t_hi, y_lo, y_hi.
        """
        if isinstance(spec, str):
            return load_preset(spec)
        if not isinstance(spec, list):
            raise ConfigError(f"environment must be a preset name or list of boxes, got {type(spec).__name__}")
        boxes = []
        for i, rec in enumerate(spec):
            if not isinstance(rec, dict) or set(rec) != {"t_lo", "t_hi", "y_lo", "y_hi"}:
                raise ConfigError(f"box {i} must have exactly keys t_lo, t_hi, y_lo, y_hi, got {rec!r}")
            try:
                boxes.append(BoxObstacle(float(rec["t_lo"]), float(rec["t_hi"]), float(rec["y_lo"]), float(rec["y_hi"])))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"box {i}: {exc}") from exc
        return BoxEnvironment(tuple(boxes))


def narrow_passage_v1() -> BoxEnvironment:
    """Four-box benchmark environment.

    The boxes leave a low corridor through the first wall, a squeeze above
    the second, and a terminal slot around y = 0, so a feasible trajectory
    must thread three passages while most random perturbations collide.
    """
    return BoxEnvironment(
        (
            BoxObstacle(0.2, 0.25, -1.0, 4.0),
            BoxObstacle(0.4, 0.6, -2.0, 2.0),
            BoxObstacle(0.7, 1.0, 0.5, 5.0),
            BoxObstacle(0.7, 1.0, -5.0, -0.5),
        )
    )


_PRESETS = {
    "narrow-passage-v1": narrow_passage_v1,
    "free-space": lambda: BoxEnvironment(()),
}


def load_preset(name: str) -> BoxEnvironment:
    try:
        return _PRESETS[name]()
    except KeyError:
        known = ", ".join(sorted(_PRESETS))
        raise ConfigError(f"unknown environment preset {name!r}; known presets: {known}") from None


@dataclass(frozen=True)
class ScoreConfig:
    """Scoring parameters: jerk penalty weight and exponent power.

    ``lambda_jerk`` scales the smoothness penalty in the collision-free
    branch; ``n_pow`` is the power applied by :func:`exp_transform`.
    """

    lambda_jerk: float = 1e-4
    n_pow: float = 100.0

    def __post_init__(self) -> None:
        if not (self.lambda_jerk >= 0.0 and np.isfinite(self.lambda_jerk)):
            raise ConfigError(f"lambda_jerk must be non-negative, got {self.lambda_jerk}")
        if not (self.n_pow > 0.0 and np.isfinite(self.n_pow)):
            raise ConfigError(f"n_pow must be positive, got {self.n_pow}")


def penetration_step(env: BoxEnvironment, t: float, y: float) -> float:
    """Penetration value at a single point: 0 outside all boxes, otherwise
    the negated distance to the nearest horizontal face, most negative over
    containing boxes."""
    s = 0.0
    for b in env.boxes:
        if b.t_lo <= t <= b.t_hi and b.y_lo <= y <= b.y_hi:
            s = min(s, -min(y - b.y_lo, b.y_hi - y))
    return s


def penetration_profile(env: BoxEnvironment, traj: Trajectory) -> np.ndarray:
    """Per-grid-point penetration values for a 1-D trajectory, shape (steps,)."""
    values = _require_1d(traj)
    return _kernels.penetration_profile_batch(values[None, :], traj.times(), env.as_array())[0]


def is_collision_free(env: BoxEnvironment, traj: Trajectory) -> bool:
    return bool((penetration_profile(env, traj) == 0.0).all())


def batch_scores(
    env: BoxEnvironment,
    values: np.ndarray,
    times: np.ndarray,
    dt: float,
    cfg: ScoreConfig,
) -> np.ndarray:
    """Score a batch of 1-D trajectories, shape (B, steps) -> (B,).

    Colliding rows score the mean penetration (non-positive); collision-free
    rows score exp(-lambda_jerk * average absolute jerk), in (0, 1].
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"values must be 2-D (batch, steps), got shape {values.shape}")
    if values.shape[1] < 4:
        raise ValueError(f"scoring needs at least 4 grid points, got {values.shape[1]}")
    return _kernels.batch_scores(values, times, env.as_array(), cfg.lambda_jerk, dt)


def trajectory_score(env: BoxEnvironment, traj: Trajectory, cfg: ScoreConfig) -> float:
    """Score a single 1-D trajectory. See :func:`batch_scores`."""
    values = _require_1d(traj)
    return float(
        batch_scores(env, values[None, :], traj.times(), traj.grid.dt, cfg)[0]
    )


def exp_transform(score: float, cfg: ScoreConfig) -> float:
    """exp(n_pow * score), clamped to keep the result finite.

    A score of -inf (hard infeasibility) maps to exactly 0. Finite
    exponent arguments are clamped to +-700, which preserves ordering for
    all scores arising from box environments (|score| well under 7).
    """
    if score == -np.inf:
        return 0.0
    arg = cfg.n_pow * score
    return float(np.exp(np.clip(arg, -EXP_CLAMP, EXP_CLAMP)))


def _require_1d(traj: Trajectory) -> np.ndarray:
    if traj.dims != 1:
        raise ValueError(f"box environments score 1-D trajectories, got dims={traj.dims}")
    return traj.values[:, 0]
