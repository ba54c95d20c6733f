"""Linear time-invariant plants and the inverted-pendulum preset."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import (
    DimensionError,
    as_matrix,
    is_symmetric_psd,
    solve_dare,
    solve_lyapunov_matrix,
    spectral_radius,
    sym_sqrt_factor,
)

# Cart position, cart velocity, pendulum angle, angular velocity.
PENDULUM_A = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 2.055, -0.722, 4.828],
        [0.0, 0.023, 0.91, 0.037],
        [0.0, 0.677, -0.453, 2.055],
    ]
)
PENDULUM_B = np.array([[0.034], [0.168], [0.019], [0.105]])
PENDULUM_X0 = np.array([0.0, 0.0, 0.1, 0.0])
THETA_INDEX = 2

DEFAULT_NOISE_VARIANCE = 1e-6
DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class LtiSystem:
    """Plant matrices together with the LQR design and its Lyapunov certificate.

    ``Phi`` and ``Z`` are filled in by :func:`synthesize`; a bare system has
    them as ``None``.
    """

    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    Zs: np.ndarray
    Zu: np.ndarray
    zeta: float = 0.01
    Phi: np.ndarray | None = field(default=None, repr=False)
    Z: np.ndarray | None = field(default=None, repr=False)
    P_ric: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        A, B = as_matrix(self.A), as_matrix(self.B)
        D, P = B.shape
        if A.shape != (D, D):
            raise DimensionError(f"A is {A.shape}, B is {B.shape}")
        W, Zs, Zu = as_matrix(self.W), as_matrix(self.Zs), as_matrix(self.Zu)
        if W.shape != (D, D) or Zs.shape != (D, D) or Zu.shape != (P, P):
            raise DimensionError("W, Zs must be DxD and Zu PxP")
        if not is_symmetric_psd(W) or not is_symmetric_psd(Zs):
            raise ValueError("W and Zs must be symmetric PSD")
        if not 0.0 < self.zeta <= 1.0:
            raise ValueError("zeta must lie in (0, 1]")
        for name, value in (("A", A), ("B", B), ("W", W), ("Zs", Zs), ("Zu", Zu)):
            object.__setattr__(self, name, value)

    @property
    def D(self) -> int:
        return self.A.shape[0]

    @property
    def P(self) -> int:
        return self.B.shape[1]

    @property
    def closed_loop(self) -> np.ndarray:
        if self.Phi is None:
            raise ValueError("gain not synthesized")
        return self.A - self.B @ self.Phi


def synthesize(sys: LtiSystem) -> LtiSystem:
    """Return a copy of ``sys`` carrying the LQR gain and Lyapunov matrix."""
    P_ric = solve_dare(sys.A, sys.B, sys.Zs, sys.Zu)
    Phi = np.linalg.solve(sys.Zu + sys.B.T @ P_ric @ sys.B, sys.B.T @ P_ric @ sys.A)
    Z = solve_lyapunov_matrix(sys.A - sys.B @ Phi)
    return replace(sys, Phi=Phi, Z=Z, P_ric=P_ric)


def make_system(A, B, W=None, Zs=None, Zu=None, zeta: float = 0.01) -> LtiSystem:
    """Build and synthesize a plant; ``W``, ``Zs``, ``Zu`` default to scaled identities."""
    A, B = as_matrix(A), as_matrix(B)
    D, P = B.shape
    W = DEFAULT_NOISE_VARIANCE * np.eye(D) if W is None else W
    Zs = np.eye(D) if Zs is None else Zs
    Zu = np.eye(P) if Zu is None else Zu
    return synthesize(LtiSystem(A=A, B=B, W=W, Zs=Zs, Zu=Zu, zeta=zeta))


def pendulum_preset(noise_variance: float = DEFAULT_NOISE_VARIANCE, zeta: float = 0.01,
                    Zs=None, Zu=None) -> LtiSystem:
    """The linearized cart-pole sampled at 10 ms, with LQR gain synthesized."""
    return make_system(PENDULUM_A.copy(), PENDULUM_B.copy(), W=noise_variance * np.eye(4),
                       Zs=Zs, Zu=Zu, zeta=zeta)


def step(sys: LtiSystem, x, u_applied, noise) -> np.ndarray:
    """Advance the plant one slot: ``A x + B u + w``."""
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u_applied, dtype=float))
    w = np.asarray(noise, dtype=float)
    if x.shape != (sys.D,) or u.shape != (sys.P,) or w.shape != (sys.D,):
        raise DimensionError(
            f"expected x:({sys.D},), u:({sys.P},), noise:({sys.D},); "
            f"got {x.shape}, {u.shape}, {w.shape}"
        )
    return sys.A @ x + sys.B @ u + w


def draw_plant_noise(sys: LtiSystem, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean Gaussian plant noise with covariance ``sys.W``."""
    return sym_sqrt_factor(sys.W) @ rng.standard_normal(sys.D)


def is_blown_up(x, limit: float = DIVERGENCE_LIMIT) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(not np.all(np.isfinite(x)) or np.max(np.abs(x)) > limit)


def open_loop_growth(sys: LtiSystem) -> float:
    return spectral_radius(sys.A)
