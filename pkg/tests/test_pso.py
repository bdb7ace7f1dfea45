import numpy as np
import pytest

from ma_aircomp import aircomp, channel, pso


@pytest.fixture(scope="module")
def realization():
    rng = np.random.default_rng(42)
    return channel.sample_channel(6, 5, 3.9, (250.0, 300.0), rng)


REGION = channel.RegionSpec(3.0, 0.5)
NOISE = 1e-8
POWER = 10.0


class TestViolationSet:
    def test_coincident_pair(self):
        assert pso.violation_set([[0.0, 0.0], [0.0, 0.0]], 0.5) == 1

    def test_spread_layout_clean(self):
        assert pso.violation_set([[-1.0, -1.0], [1.0, 1.0]], 0.5) == 0

    def test_matches_pair_loop_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            apv = rng.uniform(-1.5, 1.5, (6, 2))
            count = 0
            for i in range(6):
                for j in range(i + 1, 6):
                    if np.linalg.norm(apv[i] - apv[j]) < 0.5:
                        count += 1
            assert pso.violation_set(apv, 0.5) == count


class TestInertia:
    def test_schedule_endpoints_and_midpoint(self):
        params = pso.PsoParams(max_iter=200)
        assert pso.inertia(0, params) == pytest.approx(0.9)
        assert pso.inertia(200, params) == pytest.approx(0.4)
        assert pso.inertia(100, params) == pytest.approx(0.65)


class TestVelocityAndPosition:
    def test_converged_particle_stays(self):
        params = pso.PsoParams()
        r = np.array([0.5, -0.5])
        v = pso.update_velocity(np.zeros(2), r, r, r, 0.9, params, np.random.default_rng(0), 1.5)
        assert np.allclose(v, 0.0)

    def test_pure_inertia(self):
        params = pso.PsoParams(c1=0.0, c2=0.0)
        v0 = np.array([0.3, -0.2])
        v = pso.update_velocity(v0, np.zeros(2), np.ones(2), np.ones(2), 1.0, params,
                                np.random.default_rng(0), 1.5)
        assert np.allclose(v, v0)

    def test_velocity_deterministic_under_seed(self):
        params = pso.PsoParams()
        args = (np.array([0.1, 0.2]), np.zeros(2), np.ones(2), -np.ones(2), 0.7, params)
        v1 = pso.update_velocity(*args, np.random.default_rng(7), 1.5)
        v2 = pso.update_velocity(*args, np.random.default_rng(7), 1.5)
        assert np.array_equal(v1, v2)

    def test_velocity_clamped(self):
        params = pso.PsoParams(c1=100.0, c2=100.0)
        v = pso.update_velocity(np.zeros(2), -np.ones(2), np.ones(2), np.ones(2), 0.9,
                                params, np.random.default_rng(1), 1.5)
        assert np.all(np.abs(v) <= 1.5)

    def test_position_clamping(self):
        assert np.allclose(
            pso.update_position(np.array([1.0, -1.0]), np.array([1.0, -8.0]), REGION),
            [1.5, -1.5],
        )
        inside = pso.update_position(np.array([0.2, 0.3]), np.array([0.1, -0.1]), REGION)
        assert np.allclose(inside, [0.3, 0.2])


class TestFitness:
    def test_feasible_apv_has_no_penalty(self, realization):
        apv = np.array([[-1.0, -1.0], [1.0, 1.0]])
        rep = pso.fitness(apv, realization, NOISE, POWER, 20.0, 0.5)
        assert rep.violation_count == 0
        assert rep.fitness == pytest.approx(rep.cmse)

    def test_coincident_antennas_pay_tau(self, realization):
        apv = np.array([[0.0, 0.0], [0.0, 0.0]])
        rep = pso.fitness(apv, realization, NOISE, POWER, 20.0, 0.5)
        assert rep.violation_count == 1
        assert rep.fitness == pytest.approx(rep.cmse + 20.0)

    def test_fitness_at_least_cmse(self, realization):
        rng = np.random.default_rng(3)
        for _ in range(5):
            apv = rng.uniform(-1.5, 1.5, (4, 2))
            rep = pso.fitness(apv, realization, NOISE, POWER, 20.0, 0.5)
            assert rep.fitness >= rep.cmse


class TestInitSwarm:
    def test_bounds_and_shape(self, realization):
        params = pso.PsoParams(n_particles=40, max_iter=10)
        state = pso.init_swarm(params, REGION, 3, realization, NOISE, POWER, 123)
        assert state.positions.shape == (40, 6)
        assert np.all(np.abs(state.positions) <= 1.5)
        assert np.allclose(state.velocities, 0.0)

    def test_bit_identical_under_seed(self, realization):
        params = pso.PsoParams(n_particles=10, max_iter=10)
        s1 = pso.init_swarm(params, REGION, 2, realization, NOISE, POWER, 5)
        s2 = pso.init_swarm(params, REGION, 2, realization, NOISE, POWER, 5)
        assert np.array_equal(s1.positions, s2.positions)
        assert np.array_equal(s1.pbest_fitness, s2.pbest_fitness)
        assert s1.gbest_fitness == s2.gbest_fitness

    def test_gbest_is_min_pbest(self, realization):
        params = pso.PsoParams(n_particles=15, max_iter=10)
        state = pso.init_swarm(params, REGION, 2, realization, NOISE, POWER, 9)
        assert state.gbest_fitness == np.min(state.pbest_fitness)


class TestRunSwarm:
    def test_trace_monotone_and_full_length(self, realization):
        params = pso.PsoParams(n_particles=12, max_iter=15)
        result = pso.run_swarm(params, REGION, 3, realization, NOISE, POWER,
                               aircomp.InnerConfig(), 11)
        assert result.trace.shape == (16, 3)
        assert np.all(np.diff(result.trace[:, 0]) <= 0)
        assert np.all(np.abs(result.apv) <= 1.5)

    def test_deterministic_trace(self, realization):
        params = pso.PsoParams(n_particles=8, max_iter=10)
        r1 = pso.run_swarm(params, REGION, 2, realization, NOISE, POWER,
                           aircomp.InnerConfig(), 3)
        r2 = pso.run_swarm(params, REGION, 2, realization, NOISE, POWER,
                           aircomp.InnerConfig(), 3)
        assert np.array_equal(r1.trace, r2.trace)
        assert np.array_equal(r1.apv, r2.apv)

    def test_single_antenna_beats_center(self, realization):
        # M=1: no penalty, plain 2D search; must do at least as well as the
        # region center evaluated directly
        params = pso.PsoParams(n_particles=20, max_iter=30)
        result = pso.run_swarm(params, REGION, 1, realization, NOISE, POWER,
                               aircomp.InnerConfig(), 21)
        assert np.all(result.trace[:, 2] == 0)
        center = aircomp.inner_loop(
            channel.channel_matrix(np.zeros((1, 2)), realization), NOISE, POWER
        )
        assert result.inner.cmse <= center.cmse + 1e-9

    def test_fitness_matches_batch_evaluation(self, realization):
        # the scalar fitness op agrees with the vectorized path used in runs
        rng = np.random.default_rng(8)
        apv = rng.uniform(-1.5, 1.5, (3, 2))
        rep = pso.fitness(apv, realization, NOISE, POWER, 20.0, 0.5)
        fit, values, violations = pso._evaluate(
            apv.reshape(1, -1), realization, NOISE, POWER, 20.0, 0.5,
            aircomp.InnerConfig(),
        )
        assert fit[0] == pytest.approx(rep.fitness, abs=1e-12)
        assert violations[0] == rep.violation_count

    def test_penalty_dominance(self, realization):
        # tau above the CMSE ceiling: feasible beats infeasible layouts
        feasible = pso.fitness(np.array([[-1.0, 0.0], [1.0, 0.0]]), realization,
                               NOISE, POWER, 20.0, 0.5)
        infeasible = pso.fitness(np.array([[0.0, 0.0], [0.1, 0.0]]), realization,
                                 NOISE, POWER, 20.0, 0.5)
        assert feasible.fitness < infeasible.fitness

    def test_trace_csv_export(self, tmp_path, realization):
        params = pso.PsoParams(n_particles=6, max_iter=5)
        result = pso.run_swarm(params, REGION, 2, realization, NOISE, POWER,
                               aircomp.InnerConfig(), 2)
        path = tmp_path / "trace.csv"
        pso.write_pso_trace_csv(path, result.trace)
        lines = path.read_text().splitlines()
        assert lines[0] == "iter,gbest_fitness,gbest_cmse,violations"
        assert len(lines) == 1 + 6
