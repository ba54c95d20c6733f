"""Seed sweeps and per-scheduler aggregates: capacity, rate histograms and error curves."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import RunConfig
from .simulation import RunSummary, StepRecord, run

RATE_BINS = np.linspace(0.0, 1.0, 11)


@dataclass
class Aggregate:
    """Reduction of all runs sharing one configuration label."""

    label: str
    scheduler: str
    M: int
    K: int
    seeds: list[int]
    capacity: int
    mean_theta_curve: list
    rate_hist_u: list
    rate_hist_d: list
    mean_tail_theta: float
    mean_rate_u: float
    mean_rate_d: float
    mean_power_u: float
    mean_power_d: float
    bins: list = field(default_factory=lambda: RATE_BINS.tolist())


def capacity(summaries: list[RunSummary]) -> int:
    """Systems that are stable in every run of the group."""
    if not summaries:
        return 0
    ok = np.ones(summaries[0].M, dtype=bool)
    for s in summaries:
        ok &= np.array([sys.stable for sys in s.systems])
    return int(ok.sum())


def rate_histogram(rates) -> list[int]:
    """Counts over ten bins of width 0.1 on ``[0, 1]`` (1.0 lands in the last bin)."""
    counts, _ = np.histogram(np.asarray(rates, dtype=float), bins=RATE_BINS)
    return counts.astype(int).tolist()


def aggregate(label: str, summaries: list[RunSummary]) -> Aggregate:
    first = summaries[0]
    rates_u = [sys.rate_u for s in summaries for sys in s.systems]
    rates_d = [sys.rate_d for s in summaries for sys in s.systems]
    curves = np.array([s.mean_theta_trace for s in summaries], dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        curve = np.mean(curves, axis=0)
    return Aggregate(
        label=label,
        scheduler=first.scheduler,
        M=first.M,
        K=first.K,
        seeds=[s.seed for s in summaries],
        capacity=capacity(summaries),
        mean_theta_curve=curve.tolist(),
        rate_hist_u=rate_histogram(rates_u),
        rate_hist_d=rate_histogram(rates_d),
        mean_tail_theta=float(np.mean([sys.tail_mean_theta for s in summaries for sys in s.systems])),
        mean_rate_u=float(np.mean(rates_u)),
        mean_rate_d=float(np.mean(rates_d)),
        mean_power_u=float(np.mean([sys.mean_power_u for s in summaries for sys in s.systems])),
        mean_power_d=float(np.mean([sys.mean_power_d for s in summaries for sys in s.systems])),
    )


def config_label(cfg: RunConfig) -> str:
    return cfg.label or f"{cfg.scheduler}_M{cfg.M}_K{cfg.K}"


@dataclass
class SweepResult:
    summaries: list[RunSummary]
    records: list[StepRecord]
    aggregates: dict[str, Aggregate]

    @property
    def any_scheduler_all_diverged(self) -> bool:
        by_label: dict[str, list[RunSummary]] = {}
        for s in self.summaries:
            by_label.setdefault(s.label or s.scheduler, []).append(s)
        return any(all(s.all_diverged for s in group) for group in by_label.values())


def expand(configs: list[RunConfig], seeds: list[int] | None = None) -> list[RunConfig]:
    """One config per (config, seed); each keeps or receives its label."""
    out = []
    for cfg in configs:
        cfg = replace(cfg, label=config_label(cfg))
        for seed in (seeds if seeds is not None else [cfg.seed]):
            out.append(replace(cfg, seed=int(seed)))
    return out


def sweep(configs: list[RunConfig] | RunConfig, seeds: list[int] | None = None, workers: int = 1,
          keep_records: bool = True) -> SweepResult:
    """Run every configuration for every seed and reduce per label.

    Runs are independent, so ``workers > 1`` fans them out over processes;
    results are collected in submission order, keeping output deterministic.
    """
    if isinstance(configs, RunConfig):
        configs = [configs]
    if not configs:
        raise ValueError("sweep needs at least one configuration")
    jobs = expand(list(configs), seeds)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(cfg) for cfg in jobs]
    summaries = [r[0] for r in results]
    records = [rec for r in results for rec in r[1]] if keep_records else []
    groups: dict[str, list[RunSummary]] = {}
    for s in summaries:
        groups.setdefault(s.label, []).append(s)
    return SweepResult(summaries, records, {k: aggregate(k, v) for k, v in groups.items()})


def parse_seed_range(text: str) -> list[int]:
    """``"0..9"`` (inclusive) or a comma list ``"1,4,7"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        seeds = [int(t) for t in text.split(",") if t.strip()]
        if not seeds:
            raise ValueError
        return seeds
    except ValueError:
        raise ValueError(f"bad seed range {text!r}; use a..b or a,b,c") from None
