import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wncs.control import (
    KalmanState,
    compute_action,
    kalman_measurement_update,
    kalman_predict_update,
    select_actuator_action,
    select_controller_state,
    synthesize_gain,
)
from wncs.numerics import spectral_radius
from wncs.plant import PENDULUM_X0, THETA_INDEX, draw_plant_noise, make_system, pendulum_preset, step

P_SCALAR = 2 + np.sqrt(5)


@pytest.fixture(scope="module")
def scalar():
    return make_system([[2.0]], [[1.0]], W=[[0.0]], Zs=[[1.0]], Zu=[[1.0]])


class TestGain:
    def test_scalar(self, scalar):
        assert synthesize_gain(scalar)[0, 0] == pytest.approx(2 * P_SCALAR / (1 + P_SCALAR), abs=1e-9)
        assert synthesize_gain(scalar)[0, 0] == pytest.approx(1.6180, abs=1e-4)

    def test_stable_plant_zero_state_weight(self):
        sys = make_system(np.diag([0.5, -0.3]), np.eye(2), Zs=np.zeros((2, 2)))
        assert spectral_radius(sys.A - sys.B @ synthesize_gain(sys)) < 1

    def test_pendulum(self, pendulum):
        assert spectral_radius(pendulum.A - pendulum.B @ synthesize_gain(pendulum)) < 1


class TestAction:
    def test_zero(self, pendulum):
        np.testing.assert_array_equal(compute_action(pendulum, np.zeros(4)), np.zeros(1))

    @settings(max_examples=30, deadline=None)
    @given(arrays(float, 4, elements=st.floats(-10, 10)))
    def test_linear(self, x):
        sys = pendulum_preset()
        np.testing.assert_allclose(compute_action(sys, 2 * x), 2 * compute_action(sys, x), atol=1e-12)

    def test_scalar(self, scalar):
        assert compute_action(scalar, [1.0])[0] == pytest.approx(-1.6180, abs=1e-4)


class TestSelectors:
    @pytest.mark.parametrize("select", [select_controller_state, select_actuator_action])
    def test_branches(self, select):
        a, b = np.array([1.0, 2.0]), np.array([-1.0, 0.5])
        np.testing.assert_array_equal(select(1, a, b), a)
        np.testing.assert_array_equal(select(0, a, b), b)
        np.testing.assert_array_equal(select(0, a, a), select(1, a, a))


class TestKalman:
    def test_tracks_exact_model(self, rng):
        sys = pendulum_preset(noise_variance=0.0)
        x = PENDULUM_X0.copy()
        kf = KalmanState(mean=x.copy(), cov=np.zeros((4, 4)))
        for _ in range(30):
            u = rng.standard_normal(1) * 0.1
            x = step(sys, x, u, np.zeros(4))
            kf = kalman_predict_update(sys, kf, u)
            np.testing.assert_allclose(kf.mean, x, atol=1e-9 * max(1, np.abs(x).max()))

    def test_perfect_measurement_snaps(self, pendulum):
        kf = KalmanState(mean=np.zeros(4), cov=np.eye(4))
        obs = np.array([0.1, -0.2, 0.3, 0.0])
        out = kalman_predict_update(pendulum, kf, [0.0], observation=obs, obs_cov=np.zeros((4, 4)))
        np.testing.assert_allclose(out.mean, obs, atol=1e-12)
        out = kalman_measurement_update(kf, obs, 1e-14 * np.eye(4))
        np.testing.assert_allclose(out.mean, obs, atol=1e-10)

    def test_scalar_steady_state(self):
        a, w, r = 1.3, 0.2, 0.5
        sys = make_system([[a]], [[1.0]], W=[[w]])
        kf = KalmanState(mean=np.zeros(1), cov=np.eye(1))
        for _ in range(200):
            kf = kalman_predict_update(sys, kf, [0.0], observation=[0.0], obs_cov=[[r]])
        p = 1.0
        for _ in range(10_000):
            prior = a * a * p + w
            nxt = prior * r / (prior + r)
            if abs(nxt - p) < 1e-15:
                break
            p = nxt
        assert kf.cov[0, 0] == pytest.approx(p, abs=1e-6)

    def test_covariance_monotone_with_observations(self, pendulum):
        kf = KalmanState(mean=np.zeros(4), cov=100 * np.eye(4))
        R = 0.01 * np.eye(4)
        prev = kf.cov
        for _ in range(40):
            kf = kalman_predict_update(pendulum, kf, [0.0], observation=np.zeros(4), obs_cov=R)
            assert np.min(np.linalg.eigvalsh(prev - kf.cov)) >= -1e-9
            assert np.min(np.linalg.eigvalsh(kf.cov)) >= -1e-12
            prev = kf.cov


def test_perfect_feedback_reaches_error_region():
    # W = 0.01 I as in the original plant description; first passage below 0.05
    sys = pendulum_preset(noise_variance=0.01)
    for seed in range(10):
        r = np.random.default_rng(seed)
        x = PENDULUM_X0.copy()
        hit = False
        for _ in range(90):
            x = step(sys, x, -sys.Phi @ x, draw_plant_noise(sys, r))
            hit |= abs(x[THETA_INDEX]) < 0.05
        assert hit, f"seed {seed}"
