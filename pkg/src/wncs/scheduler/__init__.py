"""Stability-aware drift-plus-penalty scheduling and the baseline policies."""

from .core import (
    SchedulerParams,
    SlotDecision,
    VirtualQueues,
    allocate_power,
    aoi_auxiliary,
    p45_objective,
    power_auxiliary,
    schedule_slot,
    slot_scores,
    update_queues,
)
from .baselines import (
    SCHEDULER_NAMES,
    baseline_event_triggered,
    baseline_event_triggered_fdma,
    baseline_ideal,
    baseline_opportunistic,
    baseline_round_robin,
)

__all__ = [
    "SCHEDULER_NAMES",
    "SchedulerParams",
    "SlotDecision",
    "VirtualQueues",
    "allocate_power",
    "aoi_auxiliary",
    "baseline_event_triggered",
    "baseline_event_triggered_fdma",
    "baseline_ideal",
    "baseline_opportunistic",
    "baseline_round_robin",
    "p45_objective",
    "power_auxiliary",
    "schedule_slot",
    "slot_scores",
    "update_queues",
]
