"""Result files: per-slot records CSV, JSON summary and plot-data CSVs.

``records.csv`` columns, in order::

    run_seed, slot, system, x0..x{D-1}, theta_abs, action (action0.. when P > 1),
    alpha_u, alpha_d, xi_u, xi_d, beta_u, beta_d, p_u, p_d, loop_case,
    q_beta_u, q_beta_d, q_p_u, q_p_d, q_c_u, q_c_d, q_c,
    gpr_var_u_mean, gpr_var_d_mean, blown_up, scheduler

``state`` is the plant state at the start of the slot and ``action`` the
value the actuator applied during it; queues are snapshots after the slot.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .simulation import QUEUE_FIELDS, RunSummary, StepRecord
from .sweep import Aggregate, aggregate

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["runs", "aggregates"],
    "properties": {
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["scheduler", "seed", "M", "K", "tail", "systems", "n_stable", "all_diverged"],
                "properties": {
                    "systems": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["system", "tail_mean_theta", "stable", "rate_u", "rate_d",
                                         "mean_power_u", "mean_power_d", "blown_up"],
                            "properties": {
                                "rate_u": {"type": "number", "minimum": 0, "maximum": 1},
                                "rate_d": {"type": "number", "minimum": 0, "maximum": 1},
                                "stable": {"type": "boolean"},
                            },
                        },
                    },
                },
            },
        },
        "aggregates": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["scheduler", "M", "K", "seeds", "capacity", "rate_hist_u", "rate_hist_d"],
            },
        },
    },
}


class ResultsIOError(OSError):
    """A result file could not be written or read."""


def record_columns(D: int, P: int) -> list[str]:
    action = ["action"] if P == 1 else [f"action{j}" for j in range(P)]
    return (
        ["run_seed", "slot", "system"] + [f"x{j}" for j in range(D)] + ["theta_abs"] + action
        + ["alpha_u", "alpha_d", "xi_u", "xi_d", "beta_u", "beta_d", "p_u", "p_d", "loop_case"]
        + list(QUEUE_FIELDS) + ["gpr_var_u_mean", "gpr_var_d_mean", "blown_up", "scheduler"]
    )


def _row(rec: StepRecord) -> list:
    return (
        [rec.run_seed, rec.slot, rec.system] + [repr(float(v)) for v in rec.state] + [repr(rec.theta_abs)]
        + [repr(float(v)) for v in rec.action]
        + [rec.alpha_u, rec.alpha_d, rec.xi_u, rec.xi_d, rec.beta_u, rec.beta_d, repr(rec.p_u), repr(rec.p_d),
           rec.loop_case]
        + [repr(float(rec.queues[q])) for q in QUEUE_FIELDS]
        + [repr(rec.gpr_var_u_mean), repr(rec.gpr_var_d_mean), rec.blown_up, rec.scheduler]
    )


def write_records(path, records: list[StepRecord], D: int = 4, P: int = 1) -> Path:
    """Write one CSV row per (run, slot, system); an empty stream gives a header-only file."""
    path = Path(path)
    if records:
        D, P = len(records[0].state), len(records[0].action)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(record_columns(D, P))
            for rec in records:
                w.writerow(_row(rec))
    except OSError as exc:
        raise ResultsIOError(f"cannot write records to {path}: {exc}") from exc
    return path


def read_records(path) -> list[StepRecord]:
    """Parse a ``records.csv`` back into :class:`StepRecord` objects."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ResultsIOError(f"cannot read records from {path}: {exc}") from exc
    out = []
    for r in rows:
        xs = sorted((k for k in r if k.startswith("x") and k[1:].isdigit()), key=lambda k: int(k[1:]))
        acts = ["action"] if "action" in r else sorted(
            (k for k in r if k.startswith("action")), key=lambda k: int(k[6:]))
        out.append(
            StepRecord(
                run_seed=int(r["run_seed"]), slot=int(r["slot"]), system=int(r["system"]),
                state=np.array([float(r[k]) for k in xs]), theta_abs=float(r["theta_abs"]),
                action=np.array([float(r[k]) for k in acts]),
                alpha_u=int(r["alpha_u"]), alpha_d=int(r["alpha_d"]), xi_u=int(r["xi_u"]), xi_d=int(r["xi_d"]),
                beta_u=int(r["beta_u"]), beta_d=int(r["beta_d"]), p_u=float(r["p_u"]), p_d=float(r["p_d"]),
                loop_case=r["loop_case"], queues={q: float(r[q]) for q in QUEUE_FIELDS},
                gpr_var_u_mean=float(r["gpr_var_u_mean"]), gpr_var_d_mean=float(r["gpr_var_d_mean"]),
                blown_up=int(r["blown_up"]), scheduler=r["scheduler"],
            )
        )
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise ResultsIOError(f"cannot write {path}: {exc}") from exc


def _json_safe(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def summary_document(summaries: list[RunSummary], aggregates: dict[str, Aggregate] | None = None) -> dict:
    if aggregates is None:
        groups: dict[str, list[RunSummary]] = {}
        for s in summaries:
            groups.setdefault(s.label or s.scheduler, []).append(s)
        aggregates = {k: aggregate(k, v) for k, v in groups.items()}
    return _json_safe({
        "runs": [s.to_dict() for s in summaries],
        "aggregates": {k: dict(a.__dict__) for k, a in aggregates.items()},
    })


def emit_results(out_dir, summaries: list[RunSummary], records: list[StepRecord],
                 aggregates: dict[str, Aggregate] | None = None, plotdata: bool = True) -> dict[str, Path]:
    """Write ``records.csv``, ``summary.json`` and the ``plotdata_fig*.csv`` files.

    Raises
    ------
    ResultsIOError
        With the offending path when a file cannot be written.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ResultsIOError(f"cannot create output directory {out}: {exc}") from exc
    doc = summary_document(summaries, aggregates)
    paths = {"records": write_records(out / "records.csv", records)}
    paths["summary"] = out / "summary.json"
    try:
        paths["summary"].write_text(json.dumps(doc, indent=2))
    except OSError as exc:
        raise ResultsIOError(f"cannot write {paths['summary']}: {exc}") from exc
    if not plotdata:
        return paths
    aggs = doc["aggregates"]
    paths["fig19"] = out / "plotdata_fig19.csv"
    _write_csv(paths["fig19"], ["label", "scheduler", "M", "K", "n_seeds", "capacity"],
               [[k, a["scheduler"], a["M"], a["K"], len(a["seeds"]), a["capacity"]] for k, a in aggs.items()])
    paths["fig20"] = out / "plotdata_fig20.csv"
    _write_csv(paths["fig20"], ["label", "slot", "mean_abs_theta"],
               [[k, j, v] for k, a in aggs.items() for j, v in enumerate(a["mean_theta_curve"])])
    paths["fig21"] = out / "plotdata_fig21.csv"
    _write_csv(paths["fig21"], ["label", "link", "bin_lo", "bin_hi", "count"],
               [[k, link, round(a["bins"][b], 10), round(a["bins"][b + 1], 10), a[f"rate_hist_{link}"][b]]
                for k, a in aggs.items() for link in ("u", "d") for b in range(len(a["bins"]) - 1)])
    paths["fig22"] = out / "plotdata_fig22.csv"
    rows = []
    seen = set()
    for s in summaries:
        key = s.label or s.scheduler
        if key in seen or not s.systems:
            continue
        seen.add(key)
        sys0 = s.systems[0]
        rows += [[key, s.seed, 0, k, sys0.theta_trace[k], sys0.beta_u_trace[k], sys0.beta_d_trace[k]]
                 for k in range(s.K)]
    _write_csv(paths["fig22"], ["label", "seed", "system", "slot", "theta_abs", "beta_u", "beta_d"], rows)
    return paths
