"""LQR action computation, receiver-side selectors and a Kalman filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plant import LtiSystem, synthesize


def synthesize_gain(sys: LtiSystem) -> np.ndarray:
    """LQR gain ``(Zu + B'PB)^-1 B'PA`` from the stabilizing DARE solution."""
    if sys.Phi is None:
        sys = synthesize(sys)
    return sys.Phi


def compute_action(sys: LtiSystem, x_c) -> np.ndarray:
    if sys.Phi is None:
        raise ValueError("gain not synthesized")
    return -sys.Phi @ np.asarray(x_c, dtype=float)


def select_controller_state(xi_u: int, mmse_state, gpr_state) -> np.ndarray:
    """Received estimate on a successful uplink, otherwise the GPR prediction."""
    return np.asarray(mmse_state if xi_u else gpr_state, dtype=float)


def select_actuator_action(xi_d: int, mmse_action, gpr_action) -> np.ndarray:
    return np.atleast_1d(np.asarray(mmse_action if xi_d else gpr_action, dtype=float))


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray
    cov: np.ndarray


def kalman_measurement_update(kf: KalmanState, observation, obs_cov=None) -> KalmanState:
    """Identity-observation update; ``obs_cov`` defaults to a perfect measurement."""
    mean, cov = kf.mean, kf.cov
    R = np.zeros_like(cov) if obs_cov is None else np.atleast_2d(np.asarray(obs_cov, dtype=float))
    # pseudo-inverse keeps the perfect-measurement limit (cov + R singular) defined
    gain = cov @ np.linalg.pinv(cov + R)
    mean = mean + gain @ (np.asarray(observation, dtype=float) - mean)
    I_K = np.eye(len(mean)) - gain
    cov = I_K @ cov @ I_K.T + gain @ R @ gain.T
    return KalmanState(mean=mean, cov=0.5 * (cov + cov.T))


def kalman_predict_update(sys: LtiSystem, kf: KalmanState, u_prev, observation=None,
                          obs_cov=None) -> KalmanState:
    """Time update with the model, then an optional measurement update."""
    u = np.atleast_1d(np.asarray(u_prev, dtype=float))
    prior = KalmanState(mean=sys.A @ kf.mean + sys.B @ u, cov=sys.A @ kf.cov @ sys.A.T + sys.W)
    if observation is None:
        return prior
    return kalman_measurement_update(prior, observation, obs_cov)
