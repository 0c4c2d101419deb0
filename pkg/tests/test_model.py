import math

import numpy as np
import pytest

from inertial_kuramoto import (
    ConfigurationError,
    DomainError,
    IntegratorConfig,
    ModelParams,
    PhaseState,
    coupling,
    from_reduced,
    integrate,
    mean_phase_exact,
    to_reduced,
    vector_field,
)
from inertial_kuramoto.model import first_order_vector_field, reduced_params


class TestValidation:
    @pytest.mark.parametrize("m, K", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.inf, 1.0), (1.0, math.nan)])
    def test_bad_constants(self, m, K):
        with pytest.raises(ConfigurationError):
            ModelParams(m=m, K=K, omega=[0.0, 1.0])

    def test_bad_omega(self):
        with pytest.raises(ConfigurationError):
            ModelParams(m=1.0, K=1.0, omega=[])
        with pytest.raises(ConfigurationError):
            ModelParams(m=1.0, K=1.0, omega=[0.0, math.nan])

    def test_state_shapes_must_agree(self):
        with pytest.raises(ConfigurationError):
            PhaseState(0.0, [0.0, 1.0], [0.0])

    def test_dimension_mismatch(self):
        params = ModelParams(m=1.0, K=1.0, omega=[0.0, 0.0, 0.0])
        with pytest.raises(ConfigurationError):
            vector_field(PhaseState(0.0, [0.0, 1.0], [0.0, 0.0]), params)

    def test_arrays_are_read_only(self):
        params = ModelParams(m=1.0, K=1.0, omega=[0.0, 1.0])
        with pytest.raises(ValueError):
            params.omega[0] = 3.0


class TestVectorField:
    def test_identical_phases_at_rest(self):
        params = ModelParams(m=1.0, K=2.0, omega=np.zeros(3))
        _, acc = vector_field(PhaseState(0.0, [0.4, 0.4, 0.4], np.zeros(3)), params)
        np.testing.assert_array_equal(acc, 0.0)

    def test_single_oscillator(self):
        params = ModelParams(m=2.0, K=3.0, omega=[7.0])
        vel, acc = vector_field(PhaseState(0.0, [5.0], [2.0]), params)
        assert vel[0] == 2.0
        assert acc[0] == pytest.approx(2.5, abs=1e-15)

    def test_quarter_turn_pair(self):
        params = ModelParams(m=1.0, K=1.0, omega=[0.0, 0.0])
        _, acc = vector_field(PhaseState(0.0, [0.0, math.pi / 2], [0.0, 0.0]), params)
        np.testing.assert_allclose(acc, [0.5, -0.5], atol=1e-15)

    def test_returns_copy_of_velocity(self):
        params = ModelParams(m=1.0, K=1.0, omega=[0.0, 0.0])
        state = PhaseState(0.0, [0.0, 1.0], [1.0, 2.0])
        vel, _ = vector_field(state, params)
        vel[0] = 99.0
        assert state.dtheta[0] == 1.0

    @pytest.mark.parametrize(
        "theta, omega, K, expected",
        [
            ([0.0, 0.0], [1.0, -1.0], 1.0, [1.0, -1.0]),
            ([0.0, math.pi], [0.0, 0.0], 2.0, [0.0, 0.0]),
            ([0.0, math.pi / 3, 2 * math.pi / 3], [0.0, 0.0, 0.0], 3.0, [math.sqrt(3), 0.0, -math.sqrt(3)]),
        ],
    )
    def test_first_order_field(self, theta, omega, K, expected):
        params = ModelParams(m=1.0, K=K, omega=omega)
        out = first_order_vector_field(PhaseState(0.0, theta, np.zeros(len(theta))), params)
        np.testing.assert_allclose(out, expected, atol=1e-14)

    def test_coupling_sums_to_zero(self, rng):
        theta = rng.uniform(-20, 20, size=(50, 7))
        np.testing.assert_allclose(coupling(theta, 2.5).sum(axis=-1), 0.0, atol=1e-13)

    def test_coupling_is_vectorized(self, rng):
        theta = rng.uniform(-3, 3, size=(4, 5))
        batch = coupling(theta, 1.3)
        for row, out in zip(theta, batch):
            np.testing.assert_allclose(coupling(row, 1.3), out, rtol=0, atol=0)

    def test_common_shift_and_full_turns(self, rng):
        params = ModelParams(m=0.3, K=1.7, omega=rng.normal(size=5))
        theta, vel = rng.uniform(-3, 3, 5), rng.normal(size=5)
        _, base = vector_field(PhaseState(0.0, theta, vel), params)
        _, shifted = vector_field(PhaseState(0.0, theta + 1.234, vel), params)
        turned = theta.copy()
        turned[2] += 2 * math.pi
        _, wound = vector_field(PhaseState(0.0, turned, vel), params)
        np.testing.assert_allclose(shifted, base, atol=1e-12)
        np.testing.assert_allclose(wound, base, atol=1e-12)


class TestReduction:
    def test_zero_mean_frequency_is_identity(self):
        params = ModelParams(m=1.0, K=1.0, omega=[1.0, -1.0])
        state = PhaseState(2.0, [0.3, 0.1], [0.5, 0.2])
        red = to_reduced(state, params)
        np.testing.assert_array_equal(red.theta, state.theta)
        np.testing.assert_array_equal(red.dtheta, state.dtheta)

    def test_at_time_zero_only_velocities_move(self):
        params = ModelParams(m=1.0, K=1.0, omega=[3.0, 1.0])
        state = PhaseState(0.0, [4.0, 6.0], [0.0, 0.0])
        red = to_reduced(state, params)
        np.testing.assert_array_equal(red.theta, state.theta)
        np.testing.assert_array_equal(red.dtheta, [-2.0, -2.0])

    def test_hand_example(self):
        params = ModelParams(m=1.0, K=1.0, omega=[3.0, 1.0])
        red = to_reduced(PhaseState(1.0, [4.0, 6.0], [0.0, 0.0]), params)
        np.testing.assert_allclose(red.theta, [2.0, 4.0])
        np.testing.assert_allclose(red.omega, [1.0, -1.0])

    def test_round_trip(self, rng):
        params = ModelParams(m=0.5, K=1.0, omega=rng.normal(size=4))
        state = PhaseState(1.7, rng.normal(size=4), rng.normal(size=4))
        back = from_reduced(to_reduced(state, params), params)
        np.testing.assert_allclose(back.theta, state.theta, atol=1e-14)
        np.testing.assert_allclose(back.dtheta, state.dtheta, atol=1e-14)

    def test_reduced_dynamics_keep_pairwise_differences(self, rng):
        params = ModelParams(m=0.4, K=1.5, omega=rng.uniform(0.0, 2.0, 4))
        state = PhaseState(0.0, rng.uniform(-3, 3, 4), rng.normal(size=4))
        cfg = IntegratorConfig(t_end=10.0)
        orig = integrate(state, params, cfg)
        red = integrate(to_reduced(state, params).as_phase_state(), reduced_params(params), cfg)
        d_orig = orig.theta - orig.theta[:, :1]
        d_red = red.theta - red.theta[:, :1]
        np.testing.assert_allclose(d_red, d_orig, atol=1e-8)
        np.testing.assert_allclose(red.theta + params.omega_mean * red.t[:, None], orig.theta, atol=1e-8)


class TestMeanPhase:
    def test_stationary_mean(self):
        params = ModelParams(m=0.7, K=1.0, omega=[0.2, -0.2])
        theta, vel = mean_phase_exact(1.5, 0.0, params, np.linspace(0, 10, 11))
        np.testing.assert_allclose(theta, 1.5, atol=1e-15)
        np.testing.assert_allclose(vel, 0.0, atol=1e-15)

    def test_long_time_limit(self):
        params = ModelParams(m=0.5, K=1.0, omega=[0.0])
        theta, _ = mean_phase_exact(1.0, 2.0, params, 200.0)
        assert theta == pytest.approx(2.0, abs=1e-14)

    def test_unit_time(self):
        params = ModelParams(m=1.0, K=1.0, omega=[0.0, 0.0])
        theta, vel = mean_phase_exact(0.0, 1.0, params, 1.0)
        assert theta == pytest.approx(1 - math.exp(-1), abs=1e-15)
        assert vel == pytest.approx(math.exp(-1), abs=1e-15)

    def test_drift_with_nonzero_mean_frequency(self):
        params = ModelParams(m=2.0, K=1.0, omega=[1.0, 2.0])
        theta, vel = mean_phase_exact(0.0, 1.5, params, 0.0)
        assert theta == 0.0 and vel == 1.5
        theta, vel = mean_phase_exact(0.0, 1.5, params, 1e3)
        assert vel == pytest.approx(1.5, abs=1e-15)
        assert theta == pytest.approx(1.5e3, rel=1e-15)

    def test_negative_time(self):
        params = ModelParams(m=1.0, K=1.0, omega=[0.0])
        with pytest.raises(DomainError):
            mean_phase_exact(0.0, 1.0, params, -1.0)
