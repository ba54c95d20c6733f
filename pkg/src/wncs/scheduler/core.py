"""Virtual queues, closed-form auxiliaries and the two-stage slot assignment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channel import channel_gain
from ..stability import g_lb


@dataclass(frozen=True)
class SchedulerParams:
    """Drift-plus-penalty weights and power caps (linear mW)."""

    V: float = 1000.0
    omega_beta: float = 1.0
    omega_p: float = 1.0
    B_max: float = 90.0
    P_max_u: float = 100.0
    P_max_d: float = 100.0

    def __post_init__(self):
        if self.V < 0:
            raise ValueError("V must be non-negative")
        if self.omega_beta <= 0 or self.omega_p <= 0:
            raise ValueError("cost weights must be positive")
        if self.B_max < 1 or self.P_max_u <= 0 or self.P_max_d <= 0:
            raise ValueError("B_max must be >= 1 and power caps positive")


@dataclass
class VirtualQueues:
    q_beta_u: float = 0.0
    q_beta_d: float = 0.0
    q_p_u: float = 0.0
    q_p_d: float = 0.0
    q_c_u: float = 0.0
    q_c_d: float = 0.0
    q_c: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


@dataclass
class SlotDecision:
    alpha_u: np.ndarray
    alpha_d: np.ndarray
    p_u: np.ndarray
    p_d: np.ndarray
    gamma_beta_u: np.ndarray = field(default=None)
    gamma_beta_d: np.ndarray = field(default=None)
    gamma_p_u: np.ndarray = field(default=None)
    gamma_p_d: np.ndarray = field(default=None)

    @classmethod
    def idle(cls, M: int) -> "SlotDecision":
        z = np.zeros(M)
        return cls(np.zeros(M, dtype=int), np.zeros(M, dtype=int), z.copy(), z.copy())


def aoi_auxiliary(q_beta: float, params: SchedulerParams) -> float:
    """Maximizer of the concave ``V w log(1+g) - Q g`` over ``1 <= g <= B_max``.

    Equivalently the minimizer of the per-slot cost ``Q g - V w log(1+g)``.
    """
    if q_beta <= 0:
        return float(params.B_max)
    g = (params.V * params.omega_beta - q_beta) / q_beta
    return float(min(max(g, 1.0), params.B_max))


def power_auxiliary(q_p: float, params: SchedulerParams, P_max: float | None = None) -> float:
    """Maximizer of the concave ``V w log(1+g) - Q g`` over ``0 <= g <= P_max``."""
    cap = params.P_max_u if P_max is None else P_max
    if q_p <= 0:
        return float(cap)
    g = (params.V * params.omega_p - q_p) / q_p
    return float(min(max(g, 0.0), cap))


def allocate_power(q_p: float, H, N0: float, snr_th: float, P_max: float) -> tuple[float, bool]:
    """Per-link power: the least power meeting the SNR target.

    Returns ``(power, feasible)``; an infeasible link (target above ``P_max``)
    must not be scheduled this slot.
    """
    gain = channel_gain(H)
    if gain <= 0:
        return float(P_max), False
    required = snr_th * N0 / gain
    power = required if q_p >= 0 else P_max
    return float(power), bool(required <= P_max)


def slot_scores(queues: list[VirtualQueues], beta_prev_u, beta_prev_d, p_u, p_d):
    """Per-system uplink, downlink and coupling weights of the assignment problem."""
    qbu = np.array([q.q_beta_u for q in queues])
    qbd = np.array([q.q_beta_d for q in queues])
    s1 = -qbu * np.asarray(beta_prev_u, dtype=float) - np.array([q.q_c_u for q in queues])
    c1 = -qbd * np.asarray(beta_prev_d, dtype=float) - np.array([q.q_c_d for q in queues])
    w1 = s1 + np.array([q.q_p_u for q in queues]) * np.asarray(p_u, dtype=float)
    w2 = c1 + np.array([q.q_p_d for q in queues]) * np.asarray(p_d, dtype=float)
    w3 = -np.array([q.q_c for q in queues])
    return w1, w2, w3


def p45_objective(alpha_u, alpha_d, w1, w2, w3) -> float:
    """Schedule-dependent part of the assignment objective."""
    au, ad = np.asarray(alpha_u, dtype=float), np.asarray(alpha_d, dtype=float)
    return float(np.sum(au * w1 + ad * w2 + au * ad * w3))


def _argmin(values: np.ndarray, mask: np.ndarray) -> int | None:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    # np.argmin returns the first minimizer, i.e. the lowest index on ties
    return int(idx[np.argmin(values[idx])])


def schedule_slot(w1, w2, w3, feasible_u, feasible_d) -> tuple[np.ndarray, np.ndarray]:
    """Pick at most one uplink and one downlink.

    ``j1``/``j2`` minimize the uplink/downlink weights, ``j3`` the coupled
    weight. Besides the decoupled pair and the coupled pair, single-link and
    idle options are compared, so a link is only used when it strictly lowers
    the objective. Ties go to the option with fewer links, then to decoupled
    over coupled, and within a direction to the lowest index.
    """
    w1, w2, w3 = (np.asarray(w, dtype=float) for w in (w1, w2, w3))
    fu, fd = np.asarray(feasible_u, dtype=bool), np.asarray(feasible_d, dtype=bool)
    M = len(w1)
    j1 = _argmin(w1, fu)
    j2 = _argmin(w2, fd)
    j3 = _argmin(w1 + w2 + w3, fu & fd)

    options: list[tuple[float, int | None, int | None]] = [(0.0, None, None)]
    if j1 is not None:
        options.append((w1[j1], j1, None))
    if j2 is not None:
        options.append((w2[j2], None, j2))
    if j1 is not None and j2 is not None:
        pair = w1[j1] + w2[j2] + (w3[j1] if j1 == j2 else 0.0)
        options.append((pair, j1, j2))
    if j3 is not None:
        options.append((w1[j3] + w2[j3] + w3[j3], j3, j3))

    best = options[0]
    for opt in options[1:]:
        if opt[0] < best[0]:
            best = opt
    alpha_u = np.zeros(M, dtype=int)
    alpha_d = np.zeros(M, dtype=int)
    if best[1] is not None:
        alpha_u[best[1]] = 1
    if best[2] is not None:
        alpha_d[best[2]] = 1
    return alpha_u, alpha_d


def update_queues(q: VirtualQueues, *, gamma_beta_u: float, gamma_beta_d: float, gamma_p_u: float,
                  gamma_p_d: float, beta_u: int, beta_d: int, alpha_u: int, alpha_d: int, p_u: float,
                  p_d: float, bound_u: float, bound_d: float, bound_ud: float) -> VirtualQueues:
    """One slot of virtual-queue dynamics.

    ``beta_*`` are the AoI values after this slot's update; ``bound_*`` are
    the raw lower bounds and are clamped here.
    """
    return VirtualQueues(
        q_beta_u=max(q.q_beta_u - gamma_beta_u, 0.0) + beta_u,
        q_beta_d=max(q.q_beta_d - gamma_beta_d, 0.0) + beta_d,
        q_p_u=max(q.q_p_u - gamma_p_u, 0.0) + alpha_u * p_u,
        q_p_d=max(q.q_p_d - gamma_p_d, 0.0) + alpha_d * p_d,
        q_c_u=max(q.q_c_u - alpha_u, 0.0) + g_lb(bound_u),
        q_c_d=max(q.q_c_d - alpha_d, 0.0) + g_lb(bound_d),
        q_c=max(q.q_c - alpha_u * alpha_d, 0.0) + g_lb(bound_ud),
    )
