import numpy as np
import pytest

from nfgopt import (
    BoxEnvironment,
    BoxObstacle,
    ChompConfig,
    ConfigError,
    MppiConfig,
    PerturbationSampler,
    SEKernel,
    ScoreConfig,
    StompConfig,
    TimeGrid,
    Trajectory,
    chomp_gradient,
    chomp_optimize,
    factorize,
    kernel_matrix,
    mppi_optimize,
    narrow_passage_v1,
    penetration_profile,
    softmin_weights,
    stomp_iterate,
    stomp_optimize,
    stomp_weights,
    wiener_noise,
)

GRID = TimeGrid(1.0, 100.0)
ENV = narrow_passage_v1()
SCORE = ScoreConfig()


def bench_sampler(seed=0, sigma=1.0):
    K = kernel_matrix(GRID, SEKernel(0.29, 0.22))
    return PerturbationSampler(factorize(K, 1e-6 * 0.29), sigma, seed=seed)


def traj_1d(grid, values):
    return Trajectory(grid, np.asarray(values, dtype=float))


class TestStompWeights:
    @pytest.mark.parametrize(
        "kwargs", [{"batch": 1}, {"iterations": 0}, {"temperature": 0.0}, {"temperature": -1.0}]
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigError):
            StompConfig(**kwargs)

    def test_probability_vector(self):
        w = stomp_weights(np.array([0.3, 1.2, -0.5, 0.0]), 10.0)
        assert w.sum() == pytest.approx(1.0, rel=1e-12)
        assert (w > 0.0).all()

    def test_equal_costs_uniform(self):
        w = stomp_weights(np.full(5, 0.7), 10.0)
        np.testing.assert_allclose(w, 0.2, rtol=1e-9)

    def test_min_cost_dominates(self):
        costs = np.array([1.0, 0.2, 0.9])
        w = stomp_weights(costs, 10.0)
        assert int(np.argmax(w)) == 1

    def test_high_temperature_near_one_hot(self):
        w = stomp_weights(np.array([1.0, 0.0, 1.0, 1.0]), 200.0)
        assert w[1] > 0.999


class TestStompOptimize:
    def test_deterministic(self):
        y0 = traj_1d(GRID, np.zeros(100))
        cfg = StompConfig(batch=20, iterations=5)
        out1, tr1 = stomp_optimize(y0, ENV, SCORE, cfg, bench_sampler(3))
        out2, tr2 = stomp_optimize(y0, ENV, SCORE, cfg, bench_sampler(3))
        np.testing.assert_array_equal(out1.values, out2.values)
        assert [t.best_score for t in tr1] == [t.best_score for t in tr2]

    def test_single_iteration_matches_iterate(self):
        y0 = traj_1d(GRID, np.zeros(100))
        cfg = StompConfig(batch=20, iterations=1)
        sampler = bench_sampler(5)
        out, traces = stomp_optimize(y0, ENV, SCORE, cfg, sampler)
        ref = stomp_iterate(y0, ENV, SCORE, cfg, sampler.with_stream(0))
        np.testing.assert_array_equal(out.values, ref.values)
        assert len(traces) == 1

    def test_start_pinned(self):
        y0 = traj_1d(GRID, np.full(100, 0.25))
        cfg = StompConfig(batch=20, iterations=10)
        out, _ = stomp_optimize(y0, ENV, SCORE, cfg, bench_sampler(1))
        assert out.values[0, 0] == 0.25

    def test_early_stop_when_feasible(self):
        empty = BoxEnvironment(())
        y0 = traj_1d(GRID, np.zeros(100))
        cfg = StompConfig(batch=20, iterations=10, early_stop=True)
        out, traces = stomp_optimize(y0, empty, SCORE, cfg, bench_sampler(2))
        np.testing.assert_array_equal(out.values, y0.values)
        assert traces == []

    def test_multi_dim_rejected(self):
        y0 = Trajectory(GRID, np.zeros((100, 2)))
        with pytest.raises(ConfigError, match="1-D"):
            stomp_optimize(y0, ENV, SCORE, StompConfig(), bench_sampler())


class TestChompGradient:
    @pytest.mark.parametrize(
        "kwargs", [{"iterations": 0}, {"step": 0.0}, {"step": -0.1}, {"lambda_jerk": -1.0}]
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigError):
            ChompConfig(**kwargs)

    def test_constant_free_trajectory_zero_gradient(self):
        y = traj_1d(GRID, np.full(100, 3.0))
        grad = chomp_gradient(y, BoxEnvironment(()), ChompConfig(), np.random.default_rng(0))
        np.testing.assert_array_equal(grad, np.zeros(100))

    def test_colliding_unit_push_on_deepest_region(self):
        # y = 1 penetrates the first box deepest (depth 2 over t in [0.2, 0.25]);
        # the lower face is nearer so the push is -1 on exactly that run
        y = traj_1d(GRID, np.full(100, 1.0))
        grad = chomp_gradient(y, ENV, ChompConfig(), np.random.default_rng(0))
        expected = np.zeros(100)
        expected[20:26] = -1.0
        np.testing.assert_array_equal(grad, expected)

    def test_separated_runs_pick_global_deepest(self):
        env = BoxEnvironment(
            (BoxObstacle(0.1, 0.2, -0.5, 0.5), BoxObstacle(0.6, 0.7, -2.0, 2.0))
        )
        y = traj_1d(GRID, np.zeros(100))
        grad = chomp_gradient(y, env, ChompConfig(), np.random.default_rng(0))
        assert np.all(grad[:60] == 0.0)
        # 70 * 0.01 rounds just past 0.7, so the run ends at index 69
        assert np.all(np.abs(grad[60:70]) == 1.0)
        assert np.all(grad[70:] == 0.0)

    def test_midpoint_tie_uses_both_signs(self):
        env = BoxEnvironment((BoxObstacle(0.0, 1.0, -1.0, 1.0),))
        y = traj_1d(GRID, np.zeros(100))
        rng = np.random.default_rng(6)
        signs = {chomp_gradient(y, env, ChompConfig(), rng)[50] for _ in range(50)}
        assert signs == {-1.0, 1.0}

    def test_free_gradient_matches_finite_difference(self):
        grid = TimeGrid(0.08, 100.0)
        times = grid.times()
        values = times**3
        cfg = ChompConfig(lambda_jerk=1e-4)
        env = BoxEnvironment(())
        rng = np.random.default_rng(0)
        grad = chomp_gradient(traj_1d(grid, values), env, cfg, rng)

        def smoothness(v):
            d3 = v[3:] - 3.0 * v[2:-1] + 3.0 * v[1:-2] - v[:-3]
            mean_jerk = np.abs(d3).sum() / ((v.shape[0] - 3) * grid.dt**3)
            return np.exp(-cfg.lambda_jerk * mean_jerk)

        h = 1e-7
        fd = np.zeros_like(values)
        for i in range(values.shape[0]):
            hi = values.copy()
            lo = values.copy()
            hi[i] += h
            lo[i] -= h
            fd[i] = (smoothness(hi) - smoothness(lo)) / (2.0 * h)
        np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-12)


class TestChompOptimize:
    def test_single_step_semantics(self):
        y0 = traj_1d(GRID, np.full(100, 1.0))
        cfg = ChompConfig(iterations=1, step=0.05)
        out, traces = chomp_optimize(y0, ENV, cfg, np.random.default_rng(0))
        expected = np.full(100, 1.0)
        expected[20:26] -= 0.05
        np.testing.assert_array_equal(out.values[:, 0], expected)
        assert len(traces) == 1
        assert traces[0].mean_weight == 0.0
        assert traces[0].best_score <= 0.0

    def test_deterministic(self):
        y0 = traj_1d(GRID, np.zeros(100))
        cfg = ChompConfig(iterations=30, step=0.02)
        out1, _ = chomp_optimize(y0, ENV, cfg, np.random.default_rng(4))
        out2, _ = chomp_optimize(y0, ENV, cfg, np.random.default_rng(4))
        np.testing.assert_array_equal(out1.values, out2.values)

    def test_start_pinned(self):
        y0 = traj_1d(GRID, np.full(100, 1.0))
        cfg = ChompConfig(iterations=20, step=0.05)
        out, _ = chomp_optimize(y0, ENV, cfg, np.random.default_rng(0))
        assert out.values[0, 0] == 1.0

    def test_early_stop_when_feasible(self):
        y0 = traj_1d(GRID, np.full(100, 3.0))
        cfg = ChompConfig(iterations=10, early_stop=True)
        out, traces = chomp_optimize(y0, BoxEnvironment(()), cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(out.values, y0.values)
        assert traces == []


class TestMppiPieces:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rollouts": 1},
            {"iterations": 0},
            {"temperature": 0.0},
            {"noise_scale": -0.1},
            {"weight_obs": -1.0},
            {"weight_goal": -1.0},
        ],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigError):
            MppiConfig(**kwargs)

    def test_zero_noise_allowed(self):
        assert MppiConfig(noise_scale=0.0).resolved_noise_scale(0.01) == 0.0

    def test_default_noise_scale(self):
        assert MppiConfig().resolved_noise_scale(0.01) == pytest.approx(0.1 * np.sqrt(0.01))
        assert MppiConfig(noise_scale=0.05).resolved_noise_scale(0.01) == 0.05

    def test_softmin_probability_vector(self):
        w = softmin_weights(np.array([2.0, 0.5, 1.0]), 1.0)
        assert w.sum() == pytest.approx(1.0, rel=1e-12)
        assert int(np.argmax(w)) == 1

    def test_softmin_equal_costs_uniform(self):
        np.testing.assert_allclose(softmin_weights(np.full(4, 3.0), 0.5), 0.25, rtol=1e-15)

    def test_softmin_low_temperature_concentrates(self):
        w = softmin_weights(np.array([1.0, 0.0, 1.0]), 1e-3)
        assert w[1] > 0.999

    def test_wiener_noise_starts_at_zero(self):
        eps = wiener_noise(bench_sampler(9), 50, 40, 0.3)
        assert eps.shape == (50, 40)
        np.testing.assert_array_equal(eps[:, 0], np.zeros(50))

    def test_wiener_noise_deterministic(self):
        a = wiener_noise(bench_sampler(9), 8, 20, 0.3)
        b = wiener_noise(bench_sampler(9), 8, 20, 0.3)
        np.testing.assert_array_equal(a, b)

    def test_wiener_variance_grows_linearly(self):
        eps = wiener_noise(bench_sampler(10), 20000, 101, 1.0)
        v25 = eps[:, 25].var()
        v100 = eps[:, 100].var()
        assert v25 == pytest.approx(25.0, rel=0.05)
        assert v100 / v25 == pytest.approx(4.0, rel=0.1)


class TestMppiOptimize:
    def test_zero_noise_fixed_point(self):
        y0 = traj_1d(GRID, np.linspace(0.0, 1.0, 100))
        cfg = MppiConfig(rollouts=16, iterations=5, noise_scale=0.0)
        out, traces = mppi_optimize(y0, ENV, cfg, bench_sampler(0))
        np.testing.assert_array_equal(out.values, y0.values)
        assert all(t.estimator_norm == 0.0 for t in traces)

    def test_deterministic(self):
        y0 = traj_1d(GRID, np.zeros(100))
        cfg = MppiConfig(rollouts=32, iterations=10, noise_scale=0.05)
        out1, _ = mppi_optimize(y0, ENV, cfg, bench_sampler(1))
        out2, _ = mppi_optimize(y0, ENV, cfg, bench_sampler(1))
        np.testing.assert_array_equal(out1.values, out2.values)

    def test_single_iteration_matches_manual_update(self):
        grid = TimeGrid(1.0, 10.0)
        y0 = traj_1d(grid, np.zeros(10))
        cfg = MppiConfig(
            rollouts=8, iterations=1, temperature=0.7, noise_scale=0.2,
            goal=0.5, weight_obs=2.0, weight_goal=0.3,
        )
        sampler = bench_sampler(13)
        out, traces = mppi_optimize(y0, ENV, cfg, sampler)
        eps = wiener_noise(sampler.with_stream(0), 8, 10, 0.2)
        candidates = y0.values[:, 0][None, :] + eps
        pen = np.array(
            [penetration_profile(ENV, traj_1d(grid, c)) for c in candidates]
        )
        costs = 2.0 * (-pen).sum(axis=1) + 0.3 * ((candidates - 0.5) ** 2).sum(axis=1)
        weights = softmin_weights(costs, 0.7)
        expected = y0.values[:, 0] + weights @ eps
        expected[0] = 0.0
        np.testing.assert_allclose(out.values[:, 0], expected, rtol=1e-12, atol=1e-15)
        assert traces[0].best_score == pytest.approx(-costs.min(), rel=1e-12)

    def test_goal_attraction_in_free_space(self):
        grid = TimeGrid(0.5, 100.0)
        y0 = traj_1d(grid, np.zeros(50))
        cfg = MppiConfig(
            rollouts=64, iterations=60, noise_scale=0.3, goal=3.0,
            weight_obs=0.0, weight_goal=1.0,
        )
        out, _ = mppi_optimize(y0, BoxEnvironment(()), cfg, bench_sampler(2))
        before = ((y0.values[1:, 0] - 3.0) ** 2).mean()
        after = ((out.values[1:, 0] - 3.0) ** 2).mean()
        assert after < 0.5 * before

    def test_start_pinned(self):
        y0 = traj_1d(GRID, np.full(100, 0.1))
        cfg = MppiConfig(rollouts=16, iterations=5, noise_scale=0.05)
        out, _ = mppi_optimize(y0, ENV, cfg, bench_sampler(3))
        assert out.values[0, 0] == 0.1

    def test_multi_dim_rejected(self):
        y0 = Trajectory(GRID, np.zeros((100, 2)))
        with pytest.raises(ConfigError, match="1-D"):
            mppi_optimize(y0, ENV, MppiConfig(), bench_sampler())
