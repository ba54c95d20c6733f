"""Two pendulums on a shared channel under every scheduler, ten seeds each.

Prints the comparison table that ``wncs compare`` would print and the share
of seeds in which both pendulums end inside the 0.05 rad error region.
"""

from wncs.harness import RunConfig
from wncs.harness.cli import format_table
from wncs.harness.sweep import sweep
from wncs.scheduler import SCHEDULER_NAMES

configs = [RunConfig(M=2, K=90, scheduler=name) for name in SCHEDULER_NAMES]
result = sweep(configs, seeds=list(range(10)), keep_records=False)
print(format_table(result.aggregates))
print()
for label, agg in result.aggregates.items():
    runs = [s for s in result.summaries if s.label == label]
    good = sum(all(not s.blown_up and s.tail_mean_theta < 0.05 for s in r.systems) for r in runs)
    print(f"{agg.scheduler:22s} both pendulums settled in {good}/10 seeds")
