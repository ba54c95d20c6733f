"""Command-line entry point: ``run``, ``sweep`` and ``compare``.

Exit codes: 0 success, 1 configuration error, 2 every system diverged under
some scheduler (results are still written), 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import ConfigError, RunConfig, load_config
from .results import ResultsIOError, emit_results
from .sweep import parse_seed_range, sweep
from ..scheduler import SCHEDULER_NAMES

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("wncs")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wncs", description="Wireless networked control co-design simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate one configuration and seed")
    r.add_argument("--config", help="TOML run configuration (defaults are used when omitted)")
    r.add_argument("--seed", type=int)
    r.add_argument("--scheduler", choices=SCHEDULER_NAMES)
    r.add_argument("--systems", type=int, dest="M")
    r.add_argument("--slots", type=int, dest="K")
    r.add_argument("--out", help="output directory (default: the config's out_dir, else ./results)")

    s = sub.add_parser("sweep", help="run one configuration over a seed range")
    s.add_argument("--config")
    s.add_argument("--seeds", required=True, help="a..b (inclusive) or a,b,c")
    s.add_argument("--schedulers", nargs="+", choices=SCHEDULER_NAMES,
                   help="run the sweep once per scheduler (default: the config's)")
    s.add_argument("--systems", type=int, dest="M")
    s.add_argument("--slots", type=int, dest="K")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")

    c = sub.add_parser("compare", help="side-by-side summary of several configurations")
    c.add_argument("--configs", nargs="+", required=True)
    c.add_argument("--seeds", help="seed range applied to every config (default: each config's seed)")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--out")
    return p


def _load(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        return load_config(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc


def _overrides(cfg: RunConfig, args) -> RunConfig:
    try:
        return cfg.with_overrides(
            seed=getattr(args, "seed", None), scheduler=getattr(args, "scheduler", None),
            M=getattr(args, "M", None), K=getattr(args, "K", None),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def format_table(aggregates) -> str:
    head = f"{'label':32s} {'sched':22s} {'M':>3s} {'K':>5s} {'seeds':>5s} {'served':>6s} " \
           f"{'tail|theta|':>12s} {'n_u/K':>6s} {'n_d/K':>6s} {'P_u':>8s} {'P_d':>8s}"
    lines = [head, "-" * len(head)]
    for label, a in aggregates.items():
        lines.append(
            f"{label[:32]:32s} {a.scheduler:22s} {a.M:3d} {a.K:5d} {len(a.seeds):5d} {a.capacity:6d} "
            f"{a.mean_tail_theta:12.4g} {a.mean_rate_u:6.3f} {a.mean_rate_d:6.3f} "
            f"{a.mean_power_u:8.3g} {a.mean_power_d:8.3g}"
        )
    return "\n".join(lines)


def _finish(result, out, cfg: RunConfig) -> int:
    out = out or cfg.out_dir or "results"
    emit_results(out, result.summaries, result.records, result.aggregates, plotdata=cfg.record_plotdata)
    print(format_table(result.aggregates))
    print(f"results written to {out}")
    return EXIT_DIVERGED if result.any_scheduler_all_diverged else EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        if args.command == "run":
            cfg = _overrides(_load(args.config), args)
            return _finish(sweep([cfg]), args.out, cfg)
        if args.command == "sweep":
            seeds = parse_seed_range(args.seeds)
            cfg = _overrides(_load(args.config), args)
            names = args.schedulers or [cfg.scheduler]
            cfgs = [replace(cfg, scheduler=n, label=None if len(names) > 1 else cfg.label) for n in names]
            return _finish(sweep(cfgs, seeds, workers=args.workers), args.out, cfg)
        cfgs = [_load(p) for p in args.configs]
        seeds = parse_seed_range(args.seeds) if args.seeds else None
        return _finish(sweep(cfgs, seeds, workers=args.workers), args.out, cfgs[0])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResultsIOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
