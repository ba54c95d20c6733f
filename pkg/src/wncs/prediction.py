"""Per-output Gaussian-process regression over slot time.

Each signal dimension gets its own scalar GP with time as the only input and a
squared-exponential plus periodic kernel. A :class:`TrainingSet` holds the shared
training times and one value column per output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

VAR_CLAMP_TOL = 1e-10


class ColdStartError(LookupError):
    """Posterior requested from an empty training set."""


class OrderingError(ValueError):
    """Training times must be strictly increasing."""


class GprMode(str, enum.Enum):
    DIRECT = "direct"
    RECURSIVE = "recursive"


class SampleKind(str, enum.Enum):
    OBSERVED = "observed"
    PREDICTED = "predicted"


@dataclass(frozen=True)
class KernelParams:
    h_q: float = 1.0
    h_k: float = 1.0
    nu: float = 1.0
    sigma_n2: float = 0.01
    periodic_weight: float = 1.0  # 0 drops the periodic term (used in tests)

    def __post_init__(self):
        if self.h_q <= 0 or self.h_k <= 0 or self.nu <= 0:
            raise ValueError("h_q, h_k and nu must be positive")
        if self.sigma_n2 < 0:
            raise ValueError("sigma_n2 must be non-negative")


def kernel(k1, k2, p: KernelParams):
    """Covariance between outputs at slots ``k1`` and ``k2`` (broadcasts)."""
    lag = np.subtract(k1, k2, dtype=float)
    se = p.h_q**2 * np.exp(-(lag**2) / (2.0 * p.h_k**2))
    periodic = np.exp(-2.0 * np.sin(p.nu * np.pi * lag) ** 2)
    return se + p.periodic_weight * periodic


def prior_variance(p: KernelParams) -> float:
    return float(kernel(0, 0, p))


@dataclass
class TrainingSet:
    """Observation times with one value column per output.

    ``values`` has shape ``(n, F)``. ``capacity`` bounds ``n`` by evicting the
    oldest samples.
    """

    F: int
    mode: GprMode = GprMode.DIRECT
    capacity: int | None = None
    times: list[int] = field(default_factory=list)
    _values: list[np.ndarray] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def values(self) -> np.ndarray:
        if not self._values:
            return np.zeros((0, self.F))
        return np.vstack(self._values)

    def copy(self) -> "TrainingSet":
        return TrainingSet(self.F, self.mode, self.capacity, list(self.times), [v.copy() for v in self._values])


def ingest(train: TrainingSet, k: int, value, kind: SampleKind = SampleKind.OBSERVED) -> TrainingSet:
    """Append a sample; predicted samples are only kept in recursive mode."""
    kind = SampleKind(kind)
    if kind is SampleKind.PREDICTED and train.mode is GprMode.DIRECT:
        return train
    if train.times and k <= train.times[-1]:
        raise OrderingError(f"slot {k} is not after last stored slot {train.times[-1]}")
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.shape != (train.F,):
        raise ValueError(f"value must have length {train.F}")
    train.times.append(int(k))
    train._values.append(v.copy())
    if train.capacity is not None and len(train.times) > train.capacity:
        del train.times[0]
        del train._values[0]
    return train


@dataclass(frozen=True)
class GprPrediction:
    mean: np.ndarray
    var: np.ndarray

    @property
    def cov(self) -> np.ndarray:
        return np.diag(self.var)


def _posterior_all(times, values: np.ndarray, k: int, p: KernelParams) -> tuple[np.ndarray, float]:
    t = np.asarray(times, dtype=float)
    R = kernel(t[:, None], t[None, :], p) + p.sigma_n2 * np.eye(len(t))
    r = kernel(t, float(k), p)
    factor = scipy.linalg.cho_factor(R, lower=True)
    mean = r @ scipy.linalg.cho_solve(factor, values)
    var = prior_variance(p) - r @ scipy.linalg.cho_solve(factor, r)
    if var < -VAR_CLAMP_TOL:
        raise ArithmeticError(f"negative posterior variance {var}")
    return np.atleast_1d(mean), max(float(var), 0.0)


def posterior(train: TrainingSet, j: int, k: int, p: KernelParams) -> tuple[float, float]:
    """Posterior mean and variance of output ``j`` at test slot ``k``."""
    if not train.times:
        raise ColdStartError("training set is empty")
    mean, var = _posterior_all(train.times, train.values[:, j], k, p)
    return float(mean[0]), var


def predict_signal(train: TrainingSet, k: int, p: KernelParams) -> GprPrediction:
    """Stack the independent per-output posteriors at slot ``k``.

    All outputs share the same training times, so their variances coincide.
    """
    if not train.times:
        raise ColdStartError("training set is empty")
    mean, var = _posterior_all(train.times, train.values, k, p)
    return GprPrediction(mean=mean, var=np.full(train.F, var))


def predict_or_prior(train: TrainingSet, k: int, p: KernelParams) -> GprPrediction:
    """Like :func:`predict_signal` but falls back to the zero-mean prior."""
    if not train.times:
        return GprPrediction(mean=np.zeros(train.F), var=np.full(train.F, prior_variance(p)))
    return predict_signal(train, k, p)


def mirror_action_gpr(controller_action, est_err_sample) -> np.ndarray:
    """Controller-side surrogate of the actuator's received action datum."""
    return np.atleast_1d(np.asarray(controller_action, dtype=float)) + np.atleast_1d(
        np.asarray(est_err_sample, dtype=float)
    )
