#!/usr/bin/env python3
"""Measure wait rescheduling against full replanning on random join events.

For each seed: solve, inject one joining agent mid-execution, then time
(a) revise-and-augment at growing horizons and (b) replanning from current
locations. Prints per-seed rows and a summary.

Usage: python scripts/revise_vs_replan.py [N_SEEDS] [ROWS] [COLS] [N_AGENTS]
"""
from __future__ import annotations

import pathlib
import random
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from mapfkit import (AgentJoin, AgentSpec, DynamicPolicy, apply_event, begin_execution,
                     resolve_dynamic, solve_optimal)  # noqa: E402
from mapfkit.dynamics import occupied_vertices  # noqa: E402
from mapfkit.randgen import random_instance  # noqa: E402


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 25
    rows = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    cols = int(sys.argv[3]) if len(sys.argv) > 3 else 4
    n_agents = int(sys.argv[4]) if len(sys.argv) > 4 else 2
    wins = {"revise": 0, "replan": 0, "tie": 0}
    solved = 0
    print(f"{'seed':>4} {'revise':>10} {'replan':>10} {'rev_h':>6} {'rep_h':>6}")
    for seed in range(1, n + 1):
        instance = random_instance(seed, rows=rows, cols=cols, n_agents=n_agents,
                                   makespan_bound=14)
        base = solve_optimal(instance)
        if not base.is_sat or base.plan.makespan < 2:
            continue
        rng = random.Random(seed * 7919)
        t_now = rng.randint(1, base.plan.makespan - 1)
        occupied = set(occupied_vertices(base.plan, t_now))
        goals = {a.goal for a in instance.agents}
        free = sorted(instance.graph.vertices - instance.graph.obstacles - occupied)
        free_goals = sorted(instance.graph.vertices - instance.graph.obstacles - goals)
        if not free or not free_goals:
            continue
        spec = AgentSpec("new", rng.choice(free), rng.choice(free_goals),
                         battery_init=instance.battery_max)
        state = apply_event(begin_execution(instance, base.plan), AgentJoin(t_now, spec))

        t0 = time.monotonic()
        rev = resolve_dynamic(state, DynamicPolicy(fallback_replan=False))
        t_rev = time.monotonic() - t0
        t0 = time.monotonic()
        rep = resolve_dynamic(state, DynamicPolicy(delta_max=-1, fallback_replan=True))
        t_rep = time.monotonic() - t0

        if not (rev.is_sat or rep.is_sat):
            continue
        solved += 1
        rev_h = rev.horizon_used if rev.is_sat else "-"
        rep_h = rep.horizon_used if rep.is_sat else "-"
        print(f"{seed:>4} {t_rev:>9.4f}s {t_rep:>9.4f}s {rev_h!s:>6} {rep_h!s:>6}")
        if not rev.is_sat:
            wins["replan"] += 1
        elif t_rev < t_rep * 0.9:
            wins["revise"] += 1
        elif t_rep < t_rev * 0.9:
            wins["replan"] += 1
        else:
            wins["tie"] += 1
    print(f"\n{solved} scenarios: revise faster {wins['revise']}, "
          f"replan faster {wins['replan']}, ties {wins['tie']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
