"""Quadratic Lyapunov accounting and the per-slot scheduling lower bounds.

The bounds say how often each link of a system must succeed for the expected
Lyapunov value to shrink by the factor ``zeta`` per slot, given the current
prediction and estimation error covariances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plant import LtiSystem

DEGENERATE_DENOMINATOR = 1e-12


def g_lb(x: float) -> float:
    """Clamp to ``[0, 1]``."""
    return max(min(x, 1.0), 0.0)


def _zq(Z, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ Z @ x)


def expected_lyapunov(sys: LtiSystem, x_hat, J_u) -> float:
    """``E[x'Zx]`` for ``x = x_hat - e`` with ``e ~ N(0, J_u)``."""
    return _zq(sys.Z, x_hat) + float(np.trace(sys.Z @ np.asarray(J_u, dtype=float)))


@dataclass(frozen=True)
class StabilityBounds:
    m_u: float
    m_d: float
    m_ud: float

    @property
    def clamped_u(self) -> float:
        return g_lb(self.m_u)

    @property
    def clamped_d(self) -> float:
        return g_lb(self.m_d)

    @property
    def clamped_ud(self) -> float:
        return g_lb(self.m_ud)


def _ratio(num: float, den: float) -> float:
    if den <= DEGENERATE_DENOMINATOR:
        return np.inf if num > 0 else 0.0
    return num / den


def bound_terms(sys: LtiSystem, x_hat, J_u, J_d, V_u, V_d) -> dict[str, float]:
    """Numerator and the three denominators of the lower bounds."""
    Z, A, B, W = sys.Z, sys.A, sys.B, sys.W
    D = sys.D
    J_u, J_d, V_u, V_d = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (J_u, J_d, V_u, V_d))
    BPhi = B @ sys.Phi
    M_u = BPhi.T @ Z @ BPhi
    M_d = B.T @ Z @ B
    shifted = (sys.closed_loop - sys.zeta * np.eye(D)) @ np.asarray(x_hat, dtype=float)
    num = (
        _zq(Z, shifted)
        + np.trace((A.T @ Z @ A - sys.zeta * Z) @ J_u)
        + np.trace(M_d @ J_d)
        + np.trace(Z @ W)
    )
    den_u = np.trace(M_u @ J_u) - np.trace(M_u @ V_u)
    den_d = np.trace(M_d @ J_d) - np.trace(M_d @ V_d)
    den_ud = np.trace(M_u @ (J_u - V_u)) + np.trace(M_d @ (J_d - V_d))
    return {"num": float(num), "den_u": float(den_u), "den_d": float(den_d), "den_ud": float(den_ud)}


def stability_bounds(sys: LtiSystem, x_hat, J_u, J_d, V_u, V_d) -> StabilityBounds:
    """Raw uplink, downlink and coupled lower bounds.

    A denominator at or below ``1e-12`` means scheduling cannot shrink the
    uncertainty; the bound is then ``+inf`` when the numerator is positive
    (clamps to 1) and 0 otherwise.
    """
    t = bound_terms(sys, x_hat, J_u, J_d, V_u, V_d)
    return StabilityBounds(
        m_u=_ratio(t["num"], t["den_u"]),
        m_d=_ratio(t["num"], t["den_d"]),
        m_ud=_ratio(t["num"], t["den_ud"]),
    )


def expected_next_lyapunov(sys: LtiSystem, x_hat, J_u, J_d, V_u, V_d, xi_u: int, xi_d: int) -> float:
    """``E[x_{k+1}' Z x_{k+1}]`` for the loop case selected by ``(xi_u, xi_d)``.

    The controller acts on ``x_hat`` (uplink lost) or on the MMSE estimate
    ``x + v_u`` (uplink received); the actuator applies the prediction with
    error ``e_d`` (downlink lost) or the estimate with error ``v_d``. All error
    sources are independent and zero mean, so cross terms vanish.
    """
    Z, A, B = sys.Z, sys.A, sys.B
    Ac = sys.closed_loop
    BPhi = B @ sys.Phi
    J_u, J_d, V_u, V_d = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (J_u, J_d, V_u, V_d))
    value = _zq(Z, Ac @ np.asarray(x_hat, dtype=float)) + np.trace(Z @ sys.W)
    if xi_u:
        # x' = Ac x_hat - Ac e_u - B Phi v_u - ...
        value += np.trace(Ac.T @ Z @ Ac @ J_u) + np.trace(BPhi.T @ Z @ BPhi @ V_u)
    else:
        # x' = Ac x_hat - A e_u - ...
        value += np.trace(A.T @ Z @ A @ J_u)
    value += np.trace(B.T @ Z @ B @ (V_d if xi_d else J_d))
    return float(value)


def verify_decay(sys: LtiSystem, x_hat, J_u, J_d, V_u, V_d, xi_u: int, xi_d: int) -> tuple[float, float, bool]:
    """Compare the expected next Lyapunov value with ``zeta`` times the current one."""
    lhs = expected_next_lyapunov(sys, x_hat, J_u, J_d, V_u, V_d, xi_u, xi_d)
    rhs = sys.zeta * expected_lyapunov(sys, x_hat, J_u)
    return lhs, rhs, lhs <= rhs
