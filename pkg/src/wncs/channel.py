"""Rayleigh block fading, analog uncoded reception, SNR success and AoI."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# Relative slack on the SNR test so a power set exactly at threshold succeeds
# despite rounding.
SNR_RTOL = 1e-9


class Direction(str, enum.Enum):
    UL = "u"
    DL = "d"


class ContractError(RuntimeError):
    """An operation was invoked in a state its contract forbids."""


@dataclass
class LinkState:
    """Per-system, per-direction link bookkeeping for the current slot."""

    direction: Direction
    F: int
    snr_threshold: float = 10.0
    noise_floor: float = 0.01
    H: np.ndarray = field(default=None, repr=False)
    beta: int = 1
    last_reception_slot: int = 0
    alpha: int = 0
    xi: int = 0
    power: float = 0.0

    def __post_init__(self):
        if self.H is None:
            self.H = np.eye(self.F)
        if self.beta < 1:
            raise ValueError("AoI must be >= 1")


def draw_channel(F: int, rng: np.random.Generator, variance: float | None = None) -> np.ndarray:
    """Real Rayleigh block-fading matrix with i.i.d. ``N(0, variance)`` entries.

    ``variance`` defaults to ``1/F`` so that ``E||H||_F^2 = F``.
    """
    if F < 1:
        raise ValueError("F must be >= 1")
    var = 1.0 / F if variance is None else variance
    return np.sqrt(var) * rng.standard_normal((F, F))


def channel_gain(H) -> float:
    """Squared Frobenius norm of the channel."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    return float(np.sum(H * H))


def snr(link: LinkState) -> float:
    if link.power < 0:
        raise ValueError("power must be non-negative")
    return link.power * channel_gain(link.H) / link.noise_floor


def snr_success(value: float, threshold: float) -> bool:
    return value >= threshold * (1.0 - SNR_RTOL)


def update_aoi(link: LinkState, slot: int | None = None) -> LinkState:
    """Apply one slot of AoI dynamics given the resolved ``xi``."""
    if link.xi:
        link.beta = 1
        if slot is not None:
            link.last_reception_slot = slot
    else:
        link.beta += 1
    return link


def transmit(link: LinkState, signal, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Send ``signal`` over the scheduled link.

    Returns the noisy reception ``sqrt(P) H q + n`` and the transmission
    indicator, which is also stored on ``link.xi``.
    """
    if not link.alpha:
        raise ContractError(f"{link.direction.name} link is not scheduled this slot")
    q = np.atleast_1d(np.asarray(signal, dtype=float))
    if q.shape != (link.F,):
        raise ValueError(f"signal must have length {link.F}")
    noise = np.sqrt(link.noise_floor) * rng.standard_normal(link.F)
    received = np.sqrt(link.power) * link.H @ q + noise
    link.xi = int(snr_success(snr(link), link.snr_threshold))
    return received, link.xi


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
