"""Natural functional gradient ascent in a discretized function space.

Each iteration draws smooth Gaussian perturbations eps = sigma * L z around
the current mean trajectory mu, scores mu + eps in batch, and moves mu along
the weighted perturbation average

    direction = (1 / (B sigma^2)) * sum_s exp(n_pow * f_s) * eps_s,

which estimates the natural gradient of the smoothed, exponentially
transformed objective. The update stays in the span of the sampled
perturbations, so every iterate inherits the kernel's smoothness.

Weight modes: ``raw`` uses exp(n_pow * f_s) as written (exponent clamped to
keep doubles finite); ``shifted`` subtracts the batch maximum inside the
exponent first, rescaling the direction by a positive per-batch constant.
The shift prevents overflow at large n_pow and leaves the direction (and
any normalized step) unchanged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .environment import EXP_CLAMP, BoxEnvironment, ScoreConfig, batch_scores, penetration_profile
from .errors import ConfigError, DegenerateBatchError
from .sampling import PerturbationSampler
from .trajectory import Trajectory

_NORM_EPS = 1e-12

WEIGHT_MODES = ("raw", "shifted")


@dataclass(frozen=True)
class NfgConfig:
    """Optimizer settings.

    ``step_sizes`` is a constant or one value per iteration. With
    ``normalize_step`` the update direction is scaled to unit norm before
    the step, which makes a constant step usable even though raw weights
    can span hundreds of orders of magnitude.
    """

    sigma: float
    n_pow: float = 100.0
    batch: int = 100
    iterations: int = 100
    step_sizes: float | tuple[float, ...] = 0.1
    normalize_step: bool = True
    early_stop: bool = False
    weight_mode: str = "shifted"

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not np.isfinite(self.n_pow) or self.n_pow <= 0.0:
            raise ConfigError(f"n_pow must be positive, got {self.n_pow}")
        if self.batch < 1:
            raise ConfigError(f"batch must be at least 1, got {self.batch}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be at least 1, got {self.iterations}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ConfigError(f"weight_mode must be one of {WEIGHT_MODES}, got {self.weight_mode!r}")
        if isinstance(self.step_sizes, (int, float)):
            if not (self.step_sizes > 0.0 and np.isfinite(self.step_sizes)):
                raise ConfigError(f"step size must be positive, got {self.step_sizes}")
        else:
            sizes = tuple(float(s) for s in self.step_sizes)
            if len(sizes) != self.iterations:
                raise ConfigError(
                    f"step_sizes has {len(sizes)} entries for {self.iterations} iterations"
                )
            if any(not (s > 0.0 and np.isfinite(s)) for s in sizes):
                raise ConfigError("every step size must be positive")
            object.__setattr__(self, "step_sizes", sizes)

    def eta(self, iteration: int) -> float:
        if isinstance(self.step_sizes, tuple):
            return self.step_sizes[iteration]
        return float(self.step_sizes)


@dataclass(frozen=True)
class IterationTrace:
    iteration: int
    best_score: float
    mean_weight: float
    estimator_norm: float
    feasible: bool
    wall_time: float


def batch_weights(scores: np.ndarray, n_pow: float, weight_mode: str) -> np.ndarray:
    """Per-sample weights exp(n_pow * score) in the requested mode.

    Scores of -inf map to weight 0 exactly. Raises
    :class:`DegenerateBatchError` when every sample weighs 0, which can
    only happen when the whole batch scored -inf.
    """
    scores = np.asarray(scores, dtype=np.float64)
    finite_max = scores.max()
    if finite_max == -np.inf:
        raise DegenerateBatchError("every sample in the batch scored -inf")
    if weight_mode == "shifted":
        args = n_pow * (scores - finite_max)
    elif weight_mode == "raw":
        args = np.clip(n_pow * scores, -EXP_CLAMP, EXP_CLAMP)
    else:
        raise ConfigError(f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}")
    weights = np.exp(args)
    weights[scores == -np.inf] = 0.0
    return weights


def estimate_direction(
    mu_values: np.ndarray,
    objective: Callable[[np.ndarray], np.ndarray],
    sampler: PerturbationSampler,
    cfg: NfgConfig,
    iteration: int | None = None,
) -> tuple[np.ndarray, dict]:
    """Monte-Carlo natural-gradient direction for a generic batch objective.

    Parameters
    ----------
    mu_values : ndarray, shape (m,)
        Current mean in grid coordinates.
    objective : callable
        Maps a (B, m) batch of candidate vectors to (B,) scores; -inf marks
        hard infeasibility.
    sampler : PerturbationSampler
        Must carry the same sigma as ``cfg`` since the estimator divides by
        sigma^2 of the distribution the perturbations were drawn from.

    Returns
    -------
    direction : ndarray, shape (m,)
        ``(1 / (B sigma^2)) * sum_s w_s eps_s``.
    stats : dict
        ``best_score`` and ``mean_weight`` of the batch.
    """
    mu_values = np.asarray(mu_values, dtype=np.float64)
    if mu_values.ndim != 1 or mu_values.shape[0] != sampler.factor.size:
        raise ConfigError(
            f"mu has shape {mu_values.shape} but the covariance factor is {sampler.factor.size}x{sampler.factor.size}"
        )
    if abs(sampler.sigma - cfg.sigma) > 1e-12 * cfg.sigma:
        raise ConfigError(
            f"sampler sigma {sampler.sigma} does not match config sigma {cfg.sigma}"
        )
    eps = sampler.sample(cfg.batch)
    scores = np.asarray(objective(mu_values[None, :] + eps), dtype=np.float64)
    if scores.shape != (cfg.batch,):
        raise ValueError(f"objective returned shape {scores.shape}, expected ({cfg.batch},)")
    try:
        weights = batch_weights(scores, cfg.n_pow, cfg.weight_mode)
    except DegenerateBatchError as exc:
        raise DegenerateBatchError(str(exc), iteration=iteration) from None
    direction = (weights @ eps) / (cfg.batch * cfg.sigma**2)
    stats = {"best_score": float(scores.max()), "mean_weight": float(weights.mean())}
    return direction, stats


def estimate_gradient(
    mu: Trajectory,
    env: BoxEnvironment,
    score_cfg: ScoreConfig,
    sampler: PerturbationSampler,
    cfg: NfgConfig,
    iteration: int | None = None,
) -> tuple[np.ndarray, dict]:
    """Natural-gradient direction for a 1-D trajectory in a box environment."""
    if mu.dims != 1:
        raise ConfigError(f"box environments need 1-D trajectories, got dims={mu.dims}")
    times = mu.times()
    dt = mu.grid.dt

    def objective(batch_values: np.ndarray) -> np.ndarray:
        return batch_scores(env, batch_values, times, dt, score_cfg)

    return estimate_direction(mu.values[:, 0], objective, sampler, cfg, iteration=iteration)


def step(mu: Trajectory, direction: np.ndarray, eta: float, goal: float | None = None) -> Trajectory:
    """Ascent step mu + eta * direction with the start point pinned.

    The first grid point is reset to its pre-step value after the update;
    the last is reset to ``goal`` when one is given. Pinning keeps boundary
    conditions exact regardless of what the estimator proposes.
    """
    direction = np.asarray(direction, dtype=np.float64)
    if direction.ndim == 1:
        direction = direction[:, None]
    if direction.shape != mu.values.shape:
        raise ValueError(f"direction shape {direction.shape} does not match mu {mu.values.shape}")
    out = mu.values + eta * direction
    out[0] = mu.values[0]
    if goal is not None:
        out[-1] = goal
    return Trajectory(mu.grid, out)


def optimize_objective(
    values0: np.ndarray,
    objective: Callable[[np.ndarray], np.ndarray],
    sampler: PerturbationSampler,
    cfg: NfgConfig,
    feasibility: Callable[[np.ndarray], bool] | None = None,
) -> tuple[np.ndarray, list[IterationTrace]]:
    """Run the ascent loop on a generic batch objective.

    Iteration k draws from substream k of the sampler, so results do not
    depend on how many iterations ran before or after. Feasibility of the
    current mean is checked at the top of each iteration; with
    ``cfg.early_stop`` the loop exits before sampling once the mean is
    feasible, leaving no trace row for the aborted iteration.

    A degenerate batch (every sample at -inf) skips the update, records a
    zero-direction trace row, and continues with fresh samples.
    """
    values = np.asarray(values0, dtype=np.float64).copy()
    if values.ndim != 1:
        raise ConfigError(f"values0 must be 1-D, got shape {values.shape}")
    start = values[0]
    traces: list[IterationTrace] = []
    for k in range(cfg.iterations):
        t0 = time.perf_counter()
        feasible = bool(feasibility(values)) if feasibility is not None else False
        if cfg.early_stop and feasible:
            break
        try:
            direction, stats = estimate_direction(
                values, objective, sampler.with_stream(k), cfg, iteration=k
            )
        except DegenerateBatchError:
            traces.append(
                IterationTrace(k, -np.inf, 0.0, 0.0, feasible, time.perf_counter() - t0)
            )
            continue
        norm = float(np.linalg.norm(direction))
        if cfg.normalize_step:
            update = direction / (norm + _NORM_EPS)
        else:
            update = direction
        values = values + cfg.eta(k) * update
        values[0] = start
        traces.append(
            IterationTrace(
                k, stats["best_score"], stats["mean_weight"], norm, feasible,
                time.perf_counter() - t0,
            )
        )
    return values, traces


def optimize(
    mu0: Trajectory,
    env: BoxEnvironment,
    score_cfg: ScoreConfig,
    sampler: PerturbationSampler,
    cfg: NfgConfig,
) -> tuple[Trajectory, list[IterationTrace]]:
    """Optimize a 1-D trajectory against a box environment.

    Returns the final mean trajectory and one trace row per completed
    iteration. The trace's ``feasible`` flag reports whether the mean was
    collision-free when the iteration started.
    """
    if mu0.dims != 1:
        raise ConfigError(f"box environments need 1-D trajectories, got dims={mu0.dims}")
    times = mu0.times()
    dt = mu0.grid.dt
    boxes_env = env

    def objective(batch_values: np.ndarray) -> np.ndarray:
        return batch_scores(boxes_env, batch_values, times, dt, score_cfg)

    def feasibility(values: np.ndarray) -> bool:
        traj = Trajectory(mu0.grid, values)
        return bool((penetration_profile(boxes_env, traj) == 0.0).all())

    final_values, traces = optimize_objective(
        mu0.values[:, 0], objective, sampler, cfg, feasibility=feasibility
    )
    return Trajectory(mu0.grid, final_values), traces
