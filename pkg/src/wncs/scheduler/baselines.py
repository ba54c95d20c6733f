"""Baseline scheduling policies.

Each returns ``(alpha_u, alpha_d)`` integer arrays. Only live systems are ever
scheduled. The FDMA and ideal policies may schedule several systems in one
slot because they are not bound to a single shared channel.
"""

from __future__ import annotations

import numpy as np

SCHEDULER_NAMES = (
    "stability_aware",
    "round_robin",
    "opportunistic",
    "event_triggered",
    "event_triggered_fdma",
    "ideal",
)


def _single(M: int, ju: int | None, jd: int | None) -> tuple[np.ndarray, np.ndarray]:
    au = np.zeros(M, dtype=int)
    ad = np.zeros(M, dtype=int)
    if ju is not None:
        au[ju] = 1
    if jd is not None:
        ad[jd] = 1
    return au, ad


def baseline_round_robin(k: int, alive) -> tuple[np.ndarray, np.ndarray]:
    """System ``k mod M`` gets both links (idle if it has diverged)."""
    alive = np.asarray(alive, dtype=bool)
    M = len(alive)
    j = k % M
    return _single(M, j, j) if alive[j] else _single(M, None, None)


def baseline_opportunistic(gain_u, gain_d, alive) -> tuple[np.ndarray, np.ndarray]:
    """Per direction, the live system with the strongest channel."""
    alive = np.asarray(alive, dtype=bool)
    M = len(alive)
    if not alive.any():
        return _single(M, None, None)
    gu = np.where(alive, np.asarray(gain_u, dtype=float), -np.inf)
    gd = np.where(alive, np.asarray(gain_d, dtype=float), -np.inf)
    return _single(M, int(np.argmax(gu)), int(np.argmax(gd)))


def baseline_event_triggered(discrepancy, threshold: float, alive) -> tuple[np.ndarray, np.ndarray]:
    """The live system with the largest above-threshold discrepancy gets both links."""
    alive = np.asarray(alive, dtype=bool)
    d = np.asarray(discrepancy, dtype=float)
    M = len(alive)
    triggered = alive & (d >= threshold)
    if not triggered.any():
        return _single(M, None, None)
    j = int(np.argmax(np.where(triggered, d, -np.inf)))
    return _single(M, j, j)


def baseline_event_triggered_fdma(discrepancy, threshold: float, alive) -> tuple[np.ndarray, np.ndarray]:
    """Every triggered live system transmits on its own subchannel."""
    alive = np.asarray(alive, dtype=bool)
    triggered = alive & (np.asarray(discrepancy, dtype=float) >= threshold)
    a = triggered.astype(int)
    return a, a.copy()


def baseline_ideal(alive) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(alive, dtype=bool).astype(int)
    return a, a.copy()
