"""Comparison optimizers: stochastic reweighting, analytic gradient descent,
and rollout reweighting with Wiener noise.

All three share the trajectory representation, environment scoring, start
pinning, and per-iteration substream discipline of the main optimizer, so
performance differences come from the update rules alone. The stochastic
baseline draws its perturbations from the same covariance factor as the
natural-gradient optimizer; the rollout baseline uses unsmoothed
Wiener-process noise by design.

Trace rows reuse :class:`~nfgopt.nfg.IterationTrace`. ``best_score`` holds
each method's own objective (trajectory score for the two score-driven
methods, negated minimum rollout cost for the rollout method) and
``mean_weight`` the mean unnormalized sample weight, or 0 for the
deterministic gradient method.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .environment import BoxEnvironment, ScoreConfig, batch_scores, trajectory_score
from .errors import ConfigError
from .nfg import IterationTrace
from .sampling import PerturbationSampler
from .trajectory import Trajectory

_DELTA = 1e-12


# ---------------------------------------------------------------------------
# stochastic reweighting (STOMP-style)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StompConfig:
    """Settings for the stochastic reweighting baseline.

    The method minimizes the cost J(y) = 1 - f(y) by averaging the smooth
    perturbations with weights exp(-h (J_s - J_min) / (J_max - J_min + delta)).
    ``temperature`` is h; the perturbation covariance comes from the sampler
    passed at run time (shared with the natural-gradient optimizer).
    """

    batch: int = 100
    iterations: int = 100
    temperature: float = 10.0
    early_stop: bool = False

    def __post_init__(self) -> None:
        if self.batch < 2:
            raise ConfigError(f"reweighting needs a batch of at least 2, got {self.batch}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be at least 1, got {self.iterations}")
        if not (self.temperature > 0.0 and np.isfinite(self.temperature)):
            raise ConfigError(f"temperature must be positive, got {self.temperature}")


def stomp_weights(costs: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized exponential weights over per-sample costs (lower is better)."""
    costs = np.asarray(costs, dtype=np.float64)
    spread = costs.max() - costs.min()
    raw = np.exp(-temperature * (costs - costs.min()) / (spread + _DELTA))
    return raw / raw.sum()


def stomp_iterate(
    y: Trajectory,
    env: BoxEnvironment,
    score_cfg: ScoreConfig,
    cfg: StompConfig,
    sampler: PerturbationSampler,
) -> Trajectory:
    """One reweighting update: y + sum_s w_s eps_s with the start pinned."""
    values = y.values[:, 0]
    eps = sampler.sample(cfg.batch)
    scores = batch_scores(env, values[None, :] + eps, y.times(), y.grid.dt, score_cfg)
    weights = stomp_weights(1.0 - scores, cfg.temperature)
    out = values + weights @ eps
    out[0] = values[0]
    return Trajectory(y.grid, out)


def stomp_optimize(
    y0: Trajectory,
    env: BoxEnvironment,
    score_cfg: ScoreConfig,
    cfg: StompConfig,
    sampler: PerturbationSampler,
) -> tuple[Trajectory, list[IterationTrace]]:
    if y0.dims != 1:
        raise ConfigError(f"box environments need 1-D trajectories, got dims={y0.dims}")
    times = y0.times()
    dt = y0.grid.dt
    values = y0.values[:, 0].copy()
    start = values[0]
    traces: list[IterationTrace] = []
    for k in range(cfg.iterations):
        t0 = time.perf_counter()
        profile = _kernels.penetration_profile_batch(values[None, :], times, env.as_array())[0]
        feasible = bool((profile == 0.0).all())
        if cfg.early_stop and feasible:
            break
        eps = sampler.with_stream(k).sample(cfg.batch)
        scores = batch_scores(env, values[None, :] + eps, times, dt, score_cfg)
        costs = 1.0 - scores
        spread = costs.max() - costs.min()
        raw = np.exp(-cfg.temperature * (costs - costs.min()) / (spread + _DELTA))
        weights = raw / raw.sum()
        update = weights @ eps
        values = values + update
        values[0] = start
        traces.append(
            IterationTrace(
                k, float(scores.max()), float(raw.mean()), float(np.linalg.norm(update)),
                feasible, time.perf_counter() - t0,
            )
        )
    return Trajectory(y0.grid, values), traces


# ---------------------------------------------------------------------------
# analytic gradient descent (CHOMP-style)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChompConfig:
    iterations: int = 100
    step: float = 0.05
    lambda_jerk: float = 1e-4
    early_stop: bool = False

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError(f"iterations must be at least 1, got {self.iterations}")
        if not (self.step > 0.0 and np.isfinite(self.step)):
            raise ConfigError(f"step must be positive, got {self.step}")
        if not (self.lambda_jerk >= 0.0 and np.isfinite(self.lambda_jerk)):
            raise ConfigError(f"lambda_jerk must be non-negative, got {self.lambda_jerk}")


def _deepest_region(profile: np.ndarray) -> tuple[int, np.ndarray]:
    """Index of deepest penetration and the contiguous colliding run holding it."""
    deepest = int(np.argmin(profile))
    lo = deepest
    while lo > 0 and profile[lo - 1] < 0.0:
        lo -= 1
    hi = deepest
    while hi + 1 < profile.shape[0] and profile[hi + 1] < 0.0:
        hi += 1
    return deepest, np.arange(lo, hi + 1)


def _outward_sign(env: BoxEnvironment, t: float, y: float, rng: np.random.Generator) -> float:
    """Sign of the outward normal at the deepest point: toward the nearer
    horizontal face of the box with the deepest containment, random at an
    exact midpoint tie."""
    best_depth = 0.0
    best_box = None
    for b in env.boxes:
        if b.t_lo <= t <= b.t_hi and b.y_lo <= y <= b.y_hi:
            depth = min(y - b.y_lo, b.y_hi - y)
            if best_box is None or depth > best_depth:
                best_depth = depth
                best_box = b
    if best_box is None:
        raise ValueError(f"point (t={t}, y={y}) is not inside any box")
    d_lo = y - best_box.y_lo
    d_hi = best_box.y_hi - y
    if d_hi < d_lo:
        return 1.0
    if d_lo < d_hi:
        return -1.0
    return float(rng.choice((-1.0, 1.0)))


def chomp_gradient(
    y: Trajectory,
    env: BoxEnvironment,
    cfg: ChompConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Ascent direction on the trajectory score.

    Colliding: unit push along the outward normal on every grid point of
    the deepest-penetration region (the contiguous colliding run containing
    the global minimum), zero elsewhere. Collision-free: the exact gradient
    of exp(-lambda_jerk * mean |third difference| / dt^3), formed through
    the adjoint of the third-difference stencil. The only randomness is the
    tie-break at an exact midpoint.
    """
    if y.dims != 1:
        raise ConfigError(f"box environments need 1-D trajectories, got dims={y.dims}")
    values = y.values[:, 0]
    times = y.times()
    profile = _kernels.penetration_profile_batch(values[None, :], times, env.as_array())[0]
    m = values.shape[0]
    if (profile < 0.0).any():
        deepest, region = _deepest_region(profile)
        sign = _outward_sign(env, float(times[deepest]), float(values[deepest]), rng)
        direction = np.zeros(m)
        direction[region] = sign
        return direction
    dt3 = y.grid.dt**3
    windows = m - 3
    d3 = values[3:] - 3.0 * values[2:-1] + 3.0 * values[1:-2] - values[:-3]
    mean_jerk = np.abs(d3).sum() / (windows * dt3)
    sign_d3 = np.sign(d3)
    adjoint = np.zeros(m)
    adjoint[0:windows] -= sign_d3
    adjoint[1 : windows + 1] += 3.0 * sign_d3
    adjoint[2 : windows + 2] -= 3.0 * sign_d3
    adjoint[3 : windows + 3] += sign_d3
    grad_mean_jerk = adjoint / (windows * dt3)
    return np.exp(-cfg.lambda_jerk * mean_jerk) * (-cfg.lambda_jerk) * grad_mean_jerk


def chomp_optimize(
    y0: Trajectory,
    env: BoxEnvironment,
    cfg: ChompConfig,
    rng: np.random.Generator,
) -> tuple[Trajectory, list[IterationTrace]]:
    if y0.dims != 1:
        raise ConfigError(f"box environments need 1-D trajectories, got dims={y0.dims}")
    score_cfg = ScoreConfig(lambda_jerk=cfg.lambda_jerk)
    values = y0.values[:, 0].copy()
    start = values[0]
    traces: list[IterationTrace] = []
    for k in range(cfg.iterations):
        t0 = time.perf_counter()
        current = Trajectory(y0.grid, values)
        score = trajectory_score(env, current, score_cfg)
        feasible = score > 0.0
        if cfg.early_stop and feasible:
            break
        direction = chomp_gradient(current, env, cfg, rng)
        values = values + cfg.step * direction
        values[0] = start
        traces.append(
            IterationTrace(
                k, score, 0.0, float(np.linalg.norm(direction)), feasible,
                time.perf_counter() - t0,
            )
        )
    return Trajectory(y0.grid, values), traces


# ---------------------------------------------------------------------------
# rollout reweighting with Wiener noise (MPPI-style)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MppiConfig:
    """Settings for the rollout reweighting baseline.

    Rollout s perturbs the whole horizon with a Wiener path: i.i.d. normal
    increments scaled by ``noise_scale``, cumulatively summed, first
    increment zeroed so rollouts share the pinned start. ``noise_scale``
    defaults to 0.1 * sqrt(dt) when left unset. Costs are
    weight_obs * sum(-s_t) + weight_goal * sum((y_t - goal)^2), combined by
    softmin weights at the configured temperature.
    """

    rollouts: int = 100
    iterations: int = 100
    temperature: float = 1.0
    noise_scale: float | None = None
    goal: float = 0.0
    weight_obs: float = 1.0
    weight_goal: float = 1.0
    early_stop: bool = False

    def __post_init__(self) -> None:
        if self.rollouts < 2:
            raise ConfigError(f"reweighting needs at least 2 rollouts, got {self.rollouts}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be at least 1, got {self.iterations}")
        if not (self.temperature > 0.0 and np.isfinite(self.temperature)):
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if self.noise_scale is not None and not (self.noise_scale >= 0.0 and np.isfinite(self.noise_scale)):
            # zero is allowed: it degenerates to a fixed point, useful in tests
            raise ConfigError(f"noise_scale must be non-negative, got {self.noise_scale}")
        if not (self.weight_obs >= 0.0 and self.weight_goal >= 0.0):
            raise ConfigError("cost weights must be non-negative")

    def resolved_noise_scale(self, dt: float) -> float:
        if self.noise_scale is not None:
            return self.noise_scale
        return 0.1 * np.sqrt(dt)


def softmin_weights(costs: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized exp(-(J - J_min) / temperature); the lowest cost always
    receives the largest weight."""
    costs = np.asarray(costs, dtype=np.float64)
    raw = np.exp(-(costs - costs.min()) / temperature)
    return raw / raw.sum()


def wiener_noise(sampler: PerturbationSampler, count: int, steps: int, scale: float) -> np.ndarray:
    """Wiener-process perturbations, shape (count, steps).

    Row s is the cumulative sum of i.i.d. N(0, scale^2) increments with the
    first increment zeroed, so every path starts at 0 and var(eps_t) grows
    linearly in t.
    """
    increments = scale * sampler.normals(count, steps)
    increments[:, 0] = 0.0
    return np.cumsum(increments, axis=1)


def mppi_optimize(
    y0: Trajectory,
    env: BoxEnvironment,
    cfg: MppiConfig,
    sampler: PerturbationSampler,
) -> tuple[Trajectory, list[IterationTrace]]:
    """Whole-horizon iterated rollout optimization.

    Each iteration perturbs the full current trajectory with Wiener noise,
    scores every rollout's cost, and applies the softmin-weighted mean
    perturbation. The trace's ``best_score`` column holds the negated
    minimum rollout cost.
    """
    if y0.dims != 1:
        raise ConfigError(f"box environments need 1-D trajectories, got dims={y0.dims}")
    times = y0.times()
    boxes = env.as_array()
    scale = cfg.resolved_noise_scale(y0.grid.dt)
    values = y0.values[:, 0].copy()
    start = values[0]
    m = values.shape[0]
    traces: list[IterationTrace] = []
    for k in range(cfg.iterations):
        t0 = time.perf_counter()
        profile = _kernels.penetration_profile_batch(values[None, :], times, boxes)[0]
        feasible = bool((profile == 0.0).all())
        if cfg.early_stop and feasible:
            break
        eps = wiener_noise(sampler.with_stream(k), cfg.rollouts, m, scale)
        candidates = values[None, :] + eps
        pen = _kernels.penetration_profile_batch(candidates, times, boxes)
        costs = cfg.weight_obs * (-pen).sum(axis=1) + cfg.weight_goal * (
            (candidates - cfg.goal) ** 2
        ).sum(axis=1)
        raw = np.exp(-(costs - costs.min()) / cfg.temperature)
        weights = raw / raw.sum()
        update = weights @ eps
        values = values + update
        values[0] = start
        traces.append(
            IterationTrace(
                k, float(-costs.min()), float(raw.mean()), float(np.linalg.norm(update)),
                feasible, time.perf_counter() - t0,
            )
        )
    return Trajectory(y0.grid, values), traces
