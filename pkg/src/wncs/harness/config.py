"""Run configuration: dataclasses, TOML loading and CLI-style overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from ..channel import db_to_linear
from ..plant import DEFAULT_NOISE_VARIANCE, PENDULUM_A, PENDULUM_B, PENDULUM_X0, LtiSystem, make_system
from ..prediction import GprMode, KernelParams
from ..scheduler import SCHEDULER_NAMES, SchedulerParams


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class PlantConfig:
    preset: str | None = "pendulum"
    A: list | None = None
    B: list | None = None
    W: list | None = None
    noise_variance: float = DEFAULT_NOISE_VARIANCE
    Zs: list | None = None
    Zu: list | None = None
    zeta: float = 0.01
    x0: list | None = None
    theta_index: int = 2


@dataclass(frozen=True)
class ChannelConfig:
    N0_dbm: float = -20.0
    snr_threshold_db_u: float = 10.0
    snr_threshold_db_d: float = 10.0
    variance: float | None = None
    # transmitters divide by these before sending so symbols are near unit power
    source_scale_u: float = 0.01
    source_scale_d: float = 0.1

    @property
    def N0(self) -> float:
        return db_to_linear(self.N0_dbm)


@dataclass(frozen=True)
class SchedulerConfig:
    V: float = 1000.0
    omega_beta: float = 1.0
    omega_p: float = 1.0
    B_max: float | None = None  # None -> horizon K
    P_max_dbm_u: float = 20.0
    P_max_dbm_d: float = 20.0
    trigger_threshold: float = 0.002


@dataclass(frozen=True)
class GprConfig:
    h_q: float = 1.0
    h_k: float = 1.0
    nu: float = 1.0
    sigma_n2: float = 0.01
    mode: str = "direct"
    window: int | None = None

    def kernel(self) -> KernelParams:
        return KernelParams(h_q=self.h_q, h_k=self.h_k, nu=self.nu, sigma_n2=self.sigma_n2)


@dataclass(frozen=True)
class RunConfig:
    M: int = 2
    K: int = 90
    seed: int = 0
    scheduler: str = "stability_aware"
    system_seeds: tuple | None = None
    tail: int = 30
    stable_threshold: float = 0.05
    plant: PlantConfig = field(default_factory=PlantConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    sched: SchedulerConfig = field(default_factory=SchedulerConfig)
    gpr: GprConfig = field(default_factory=GprConfig)
    record_plotdata: bool = True
    out_dir: str | None = None
    label: str | None = None

    def __post_init__(self):
        validate(self)

    def scheduler_params(self) -> SchedulerParams:
        s = self.sched
        return SchedulerParams(
            V=s.V,
            omega_beta=s.omega_beta,
            omega_p=s.omega_p,
            B_max=float(self.K if s.B_max is None else s.B_max),
            P_max_u=db_to_linear(s.P_max_dbm_u),
            P_max_d=db_to_linear(s.P_max_dbm_d),
        )

    def build_system(self) -> LtiSystem:
        p = self.plant
        if p.A is not None or p.B is not None:
            if p.A is None or p.B is None:
                raise ConfigError("explicit plants need both A and B")
            A, B = np.asarray(p.A, dtype=float), np.asarray(p.B, dtype=float)
            if B.ndim == 1:
                B = B[:, None]
        elif p.preset == "pendulum":
            A, B = PENDULUM_A, PENDULUM_B
        else:
            raise ConfigError(f"unknown plant preset {p.preset!r}")
        D = A.shape[0]
        W = np.asarray(p.W, dtype=float) if p.W is not None else p.noise_variance * np.eye(D)
        Zs = None if p.Zs is None else np.asarray(p.Zs, dtype=float)
        Zu = None if p.Zu is None else np.atleast_2d(np.asarray(p.Zu, dtype=float))
        try:
            return make_system(A, B, W=W, Zs=Zs, Zu=Zu, zeta=p.zeta)
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"plant: {exc}") from exc

    def initial_state(self, D: int) -> np.ndarray:
        if self.plant.x0 is not None:
            x0 = np.asarray(self.plant.x0, dtype=float)
        elif D == len(PENDULUM_X0):
            x0 = PENDULUM_X0.copy()
        else:
            x0 = np.zeros(D)
        if x0.shape != (D,):
            raise ConfigError(f"x0 must have length {D}")
        return x0

    def with_overrides(self, **kw: Any) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def validate(cfg: RunConfig) -> None:
    if cfg.M < 1 or cfg.K < 1:
        raise ConfigError("M and K must be >= 1")
    if cfg.scheduler not in SCHEDULER_NAMES:
        raise ConfigError(f"scheduler must be one of {', '.join(SCHEDULER_NAMES)}")
    if cfg.channel.source_scale_u <= 0 or cfg.channel.source_scale_d <= 0:
        raise ConfigError("source scales must be positive")
    if cfg.tail < 1:
        raise ConfigError("tail must be >= 1")
    if cfg.system_seeds is not None and len(cfg.system_seeds) != cfg.M:
        raise ConfigError("system_seeds needs one entry per system")
    if cfg.gpr.mode not in {m.value for m in GprMode}:
        raise ConfigError("gpr.mode must be 'direct' or 'recursive'")
    if cfg.gpr.window is not None and cfg.gpr.window < 1:
        raise ConfigError("gpr.window must be >= 1")
    if cfg.sched.trigger_threshold < 0:
        raise ConfigError("trigger_threshold must be >= 0")
    try:
        cfg.gpr.kernel()
        cfg.scheduler_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_SECTIONS = {"plant": PlantConfig, "channel": ChannelConfig, "scheduler_params": SchedulerConfig, "gpr": GprConfig}
_SECTION_FIELD = {"plant": "plant", "channel": "channel", "scheduler_params": "sched", "gpr": "gpr"}


def _build(cls, data: dict, where: str):
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    kw: dict[str, Any] = {}
    for section, cls in _SECTIONS.items():
        if section in data:
            sub = data.pop(section)
            if not isinstance(sub, dict):
                raise ConfigError(f"[{section}] must be a table")
            kw[_SECTION_FIELD[section]] = _build(cls, sub, section)
    top = {f.name for f in fields(RunConfig)} - set(_SECTION_FIELD.values())
    unknown = set(data) - top
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    if "system_seeds" in data and data["system_seeds"] is not None:
        data["system_seeds"] = tuple(int(s) for s in data["system_seeds"])
    try:
        return RunConfig(**data, **kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    """Read a TOML run configuration.

    Raises
    ------
    ConfigError
        On parse errors or invalid values.
    OSError
        If the file cannot be read.
    """
    path = Path(path)
    with path.open("rb") as fh:
        try:
            data = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
