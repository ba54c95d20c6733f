"""Linear MMSE restoration of an analog transmission."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import psd_solve


@dataclass(frozen=True)
class MmseResult:
    estimate: np.ndarray
    error_cov: np.ndarray
    gain: np.ndarray


def mmse_gain(H, power: float, N0: float, Sq=None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(G, V)``: the LMMSE matrix and its error covariance.

    ``G = sqrt(P) Sq H' (P H Sq H' + N0 I)^-1`` and ``V = Sq - G sqrt(P) H Sq``.
    The covariance does not depend on the received vector, so the scheduler
    can evaluate it before transmitting.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    F = H.shape[0]
    if power <= 0:
        raise ValueError("power must be positive")
    Sq = np.eye(F) if Sq is None else np.atleast_2d(np.asarray(Sq, dtype=float))
    inner = power * H @ Sq @ H.T + N0 * np.eye(F)
    # G' = inner^-1 (sqrt(P) H Sq) since inner and Sq are symmetric
    G = psd_solve(inner, np.sqrt(power) * H @ Sq).T
    V = Sq - G @ (np.sqrt(power) * H) @ Sq
    return G, 0.5 * (V + V.T)


def mmse_estimate(y, H, power: float, N0: float, Sq=None) -> MmseResult:
    G, V = mmse_gain(H, power, N0, Sq)
    return MmseResult(estimate=G @ np.atleast_1d(np.asarray(y, dtype=float)), error_cov=V, gain=G)
