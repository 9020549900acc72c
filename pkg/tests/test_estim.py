import numpy as np
import pytest

from kinloc.errors import (DegenerateGeometry, SingularGeometry, TooFewSensors,
                           ZeroRange)
from kinloc.estim import (UNIFORM, WeightRule, acceleration_pseudo_measurements,
                          build_velocity_system, estimate_acceleration,
                          estimate_all, estimate_position, estimate_velocity,
                          solve_linear_stage)
from kinloc.model import (MeasurementSet, NoiseSpec, SensorArray, TargetState,
                          range_to, synthesize_measurements, true_measurements)

NOISELESS = NoiseSpec(0.0, 0.0, 0.0)


def exact_measurements(target, sensors):
    r, a, b = true_measurements(target, sensors)
    return MeasurementSet(r, a, b, NOISELESS)


class TestEstimatePosition:
    def test_reference_layout_noiseless(self, sensors8):
        ms = exact_measurements(TargetState((30.0, 40.0), (0.0, 0.0)), sensors8)
        sol = estimate_position(ms, sensors8)
        np.testing.assert_allclose(sol.position, [30.0, 40.0], rtol=0, atol=1e-9)
        assert sol.theta3 == pytest.approx(30.0 ** 2 + 40.0 ** 2, rel=1e-9)
        assert sol.residual_norm < 1e-8
        assert sol.gram_condition >= 1.0

    def test_three_sensor_exact_with_back_substitution(self):
        sensors = SensorArray([(0.0, 0.0), (100.0, 0.0), (0.0, 100.0)])
        ms = exact_measurements(TargetState((30.0, 40.0), (0.0, 0.0)), sensors)
        sol = estimate_position(ms, sensors)
        np.testing.assert_allclose(sol.position, [30.0, 40.0], rtol=0, atol=1e-9)
        for pos, r_meas in zip(sensors.positions, ms.ranges):
            assert range_to(sol.position, pos) == pytest.approx(r_meas, abs=1e-9)

    def test_collinear_sensors_degenerate(self):
        sensors = SensorArray([(0.0, 0.0), (50.0, 0.0), (100.0, 0.0)])
        ms = exact_measurements(TargetState((30.0, 40.0), (0.0, 0.0)), sensors)
        with pytest.raises(DegenerateGeometry):
            estimate_position(ms, sensors)

    def test_two_sensors_rejected(self):
        sensors = SensorArray([(0.0, 0.0), (100.0, 0.0)])
        ms = exact_measurements(TargetState((30.0, 40.0), (0.0, 0.0)), sensors)
        with pytest.raises(TooFewSensors):
            estimate_position(ms, sensors)


class TestBuildVelocitySystem:
    def test_unit_range_rows(self):
        sensors = SensorArray([(1.0, 0.0), (0.0, 1.0)])
        ms = MeasurementSet([1.0, 1.0], [2.0, 3.0], [0.0, 0.0], NOISELESS)
        B, d, w = build_velocity_system(ms, sensors, (0.0, 0.0), UNIFORM)
        np.testing.assert_array_equal(B, [[-1.0, 0.0], [0.0, -1.0]])
        np.testing.assert_allclose(d, [2.0, 3.0], rtol=0, atol=1e-15)
        np.testing.assert_array_equal(w, [1.0, 1.0])

    def test_inverse_range_weight(self):
        sensors = SensorArray([(0.0, 0.0), (6.0, 8.0)])
        ms = MeasurementSet([5.0, 5.0], [1.0, 1.0], [0.0, 0.0], NOISELESS)
        _, _, w = build_velocity_system(ms, sensors, (3.0, 4.0), WeightRule())
        assert w[0] == pytest.approx(0.2, rel=1e-15)

    def test_measured_range_source(self):
        sensors = SensorArray([(0.0, 0.0), (6.0, 8.0)])
        ms = MeasurementSet([7.0, 9.0], [2.0, 3.0], [0.0, 0.0], NOISELESS)
        _, d, _ = build_velocity_system(ms, sensors, (3.0, 4.0), UNIFORM,
                                        range_source="measured")
        np.testing.assert_allclose(d, [14.0, 27.0], rtol=1e-15)

    def test_position_on_sensor_raises(self):
        sensors = SensorArray([(3.0, 4.0), (0.0, 1.0), (1.0, 0.0)])
        ms = MeasurementSet([1.0, 1.0, 1.0], [0.0] * 3, [0.0] * 3, NOISELESS)
        with pytest.raises(ZeroRange):
            build_velocity_system(ms, sensors, (3.0, 4.0), UNIFORM)


class TestSolveLinearStage:
    def test_consistent_system_recovers_exactly(self, rng):
        for _ in range(50):
            B = rng.normal(0, 50, (6, 2))
            x_true = rng.normal(0, 10, 2)
            est = solve_linear_stage(B, B @ x_true, np.ones(6))
            np.testing.assert_allclose(est.value, x_true, rtol=0,
                                       atol=1e-9 * max(1.0, np.abs(x_true).max()))

    def test_parallel_rows_singular(self):
        B = np.outer([1.0, 2.0, 3.0], [1.0, 1.0])
        with pytest.raises(SingularGeometry):
            solve_linear_stage(B, np.array([1.0, 2.0, 3.0]), np.ones(3))

    def test_gradient_at_solution_is_zero(self, rng):
        # stationarity: grad = -2 B^T W (rhs - B x) must vanish at the minimizer
        for _ in range(50):
            B = rng.normal(0, 20, (8, 2))
            rhs = rng.normal(0, 100, 8)
            w = rng.uniform(0.1, 5.0, 8)
            est = solve_linear_stage(B, rhs, w)
            grad = -2.0 * B.T @ (w * (rhs - B @ est.value))
            assert np.linalg.norm(grad) <= 1e-8 * (1.0 + np.linalg.norm(rhs))

    def test_minimizer_property(self, rng):
        def cost(B, rhs, w, x):
            return float(np.sum(w * (rhs - B @ x) ** 2))

        for _ in range(20):
            B = rng.normal(0, 20, (8, 2))
            rhs = rng.normal(0, 100, 8)
            w = rng.uniform(0.1, 5.0, 8)
            est = solve_linear_stage(B, rhs, w)
            at_min = cost(B, rhs, w, est.value)
            for _ in range(10):
                direction = rng.normal(0, 1, 2)
                direction /= np.linalg.norm(direction)
                for eps in (1e-3, -1e-3):
                    assert cost(B, rhs, w, est.value + eps * direction) >= at_min

    def test_weight_scaling_invariance(self, rng):
        B = rng.normal(0, 20, (8, 2))
        rhs = rng.normal(0, 100, 8)
        w = rng.uniform(0.1, 5.0, 8)
        base = solve_linear_stage(B, rhs, w)
        for scale in (1e-6, 0.5, 3.0, 1e6):
            scaled = solve_linear_stage(B, rhs, w * scale)
            np.testing.assert_allclose(scaled.value, base.value, rtol=1e-12, atol=1e-12)

    def test_uniform_weights_reduce_to_plain_ls(self, rng):
        B = rng.normal(0, 20, (8, 2))
        rhs = rng.normal(0, 100, 8)
        uniform = solve_linear_stage(B, rhs, np.ones(8))
        scaled_uniform = solve_linear_stage(B, rhs, np.full(8, 2.5))
        np.testing.assert_allclose(scaled_uniform.value, uniform.value,
                                   rtol=1e-12, atol=1e-12)
        assert uniform.method == "LS"

    def test_bad_shapes_rejected(self):
        with pytest.raises(ValueError):
            solve_linear_stage(np.ones((3, 3)), np.ones(3), np.ones(3))
        with pytest.raises(ValueError):
            solve_linear_stage(np.ones((3, 2)), np.ones(4), np.ones(3))


class TestEstimateVelocity:
    def test_noiseless_recovery_with_true_position(self, sensors8):
        truth = TargetState((30.0, 40.0), (10.0, -5.0))
        ms = exact_measurements(truth, sensors8)
        est = estimate_velocity(ms, sensors8, truth.position, UNIFORM)
        np.testing.assert_allclose(est.value, [10.0, -5.0], rtol=0, atol=1e-9)
        assert est.method == "LS"

    def test_noiseless_wls_equals_ls(self, sensors8):
        truth = TargetState((30.0, 40.0), (10.0, -5.0))
        ms = exact_measurements(truth, sensors8)
        ls = estimate_velocity(ms, sensors8, truth.position, UNIFORM)
        wls = estimate_velocity(ms, sensors8, truth.position, WeightRule())
        np.testing.assert_allclose(wls.value, ls.value, rtol=0, atol=1e-9)
        assert wls.method == "WLS"

    def test_reweighting_is_a_fixed_point(self, sensors8, rng):
        truth = TargetState((30.0, 40.0), (10.0, -5.0))
        ms = synthesize_measurements(truth, sensors8, NoiseSpec(), rng)
        p_hat = estimate_position(ms, sensors8).position
        once = estimate_velocity(ms, sensors8, p_hat, WeightRule(), reweight_passes=1)
        thrice = estimate_velocity(ms, sensors8, p_hat, WeightRule(), reweight_passes=3)
        np.testing.assert_array_equal(once.value, thrice.value)

    def test_wls_beats_ls_at_default_noise(self, sensors8):
        # ensemble ordering that motivates the weighting: sigma_rr = 1
        gen = np.random.default_rng(7)
        se_ls, se_wls = 0.0, 0.0
        trials = 1000
        for _ in range(trials):
            truth = TargetState(gen.uniform(0, 100, 2), gen.uniform(-20, 20, 2))
            ms = synthesize_measurements(truth, sensors8, NoiseSpec(1.0, 1.0, 1.0), gen)
            p_hat = estimate_position(ms, sensors8).position
            v_ls = estimate_velocity(ms, sensors8, p_hat, UNIFORM).value
            v_wls = estimate_velocity(ms, sensors8, p_hat, WeightRule()).value
            se_ls += np.sum((v_ls - truth.velocity) ** 2)
            se_wls += np.sum((v_wls - truth.velocity) ** 2)
        assert np.sqrt(se_wls / trials) <= 1.02 * np.sqrt(se_ls / trials)


class TestAccelerationPseudoMeasurements:
    def test_zero_acceleration_circular(self):
        sensors = SensorArray([(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)])
        truth = TargetState((5.0, 0.0), (0.0, 2.0), (0.0, 0.0))
        ms = exact_measurements(truth, sensors)
        assert ms.drrs[0] == pytest.approx(0.8, abs=1e-12)
        k = acceleration_pseudo_measurements(ms, sensors, truth.position,
                                             truth.velocity)
        assert k[0] == pytest.approx(0.0, abs=1e-9)

    def test_radial_case(self):
        sensors = SensorArray([(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)])
        truth = TargetState((5.0, 0.0), (3.0, 0.0), (1.0, 0.0))
        ms = exact_measurements(truth, sensors)
        assert ms.drrs[0] == pytest.approx(1.0, abs=1e-12)
        k = acceleration_pseudo_measurements(ms, sensors, truth.position,
                                             truth.velocity)
        # a . (p - p_0) = (1,0) . (5,0) = 5
        assert k[0] == pytest.approx(5.0, abs=1e-9)

    def test_identity_against_analytic_drr(self, sensors8, rng):
        for _ in range(100):
            truth = TargetState(rng.uniform(0, 100, 2), rng.uniform(-20, 20, 2),
                                rng.uniform(-10, 10, 2))
            ms = exact_measurements(truth, sensors8)
            k = acceleration_pseudo_measurements(ms, sensors8, truth.position,
                                                 truth.velocity)
            expected = (sensors8.positions * -1 + truth.position) @ truth.acceleration
            np.testing.assert_allclose(k, expected, rtol=0,
                                       atol=1e-9 * max(1.0, np.abs(expected).max()))


class TestEstimateAcceleration:
    def test_noiseless_recovery(self, sensors8):
        truth = TargetState((30.0, 40.0), (10.0, -5.0), (2.0, -1.0))
        ms = exact_measurements(truth, sensors8)
        est = estimate_acceleration(ms, sensors8, truth.position, truth.velocity,
                                    UNIFORM)
        np.testing.assert_allclose(est.value, [2.0, -1.0], rtol=0, atol=1e-9)

    def test_zero_acceleration(self, sensors8):
        truth = TargetState((30.0, 40.0), (10.0, -5.0))
        ms = exact_measurements(truth, sensors8)
        est = estimate_acceleration(ms, sensors8, truth.position, truth.velocity,
                                    WeightRule())
        np.testing.assert_allclose(est.value, [0.0, 0.0], rtol=0, atol=1e-9)


class TestPipeline:
    def test_noiseless_end_to_end(self, sensors8, rng):
        for _ in range(25):
            truth = TargetState(rng.uniform(0, 100, 2), rng.uniform(-20, 20, 2),
                                rng.uniform(-10, 10, 2))
            ms = exact_measurements(truth, sensors8)
            res = estimate_all(ms, sensors8)
            np.testing.assert_allclose(res.position.position, truth.position,
                                       rtol=0, atol=1e-6)
            for est, want in [(res.velocity_ls, truth.velocity),
                              (res.velocity_wls, truth.velocity),
                              (res.accel_ls, truth.acceleration),
                              (res.accel_wls, truth.acceleration)]:
                np.testing.assert_allclose(est.value, want, rtol=0, atol=1e-6)

    def test_position_noise_biases_velocity(self, sensors8):
        # sequential coupling: range noise alone must disturb the velocity stage
        gen = np.random.default_rng(3)
        worst = 0.0
        for _ in range(20):
            truth = TargetState(gen.uniform(0, 100, 2), gen.uniform(-20, 20, 2))
            ms = synthesize_measurements(truth, sensors8, NoiseSpec(1.0, 0.0, 0.0), gen)
            res = estimate_all(ms, sensors8)
            worst = max(worst, np.abs(res.velocity_ls.value - truth.velocity).max())
        assert worst > 1e-6

    def test_methods_labeled(self, sensors8, rng):
        truth = TargetState((30.0, 40.0), (10.0, -5.0), (1.0, 1.0))
        ms = synthesize_measurements(truth, sensors8, NoiseSpec(), rng)
        res = estimate_all(ms, sensors8)
        assert res.velocity_ls.method == "LS"
        assert res.velocity_wls.method == "WLS"
        assert res.accel_ls.method == "LS"
        assert res.accel_wls.method == "WLS"
