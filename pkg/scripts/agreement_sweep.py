#!/usr/bin/env python3
"""Sweep random instances and compare the solver against the brute-force reference.

Usage: python scripts/agreement_sweep.py [N_SEEDS] [ROWS] [COLS]
"""
from __future__ import annotations

import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from mapfkit import brute_force_optimal, solve_optimal  # noqa: E402
from mapfkit.randgen import random_instance  # noqa: E402


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 50
    rows = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    cols = int(sys.argv[3]) if len(sys.argv) > 3 else 4
    mismatches = 0
    sat = 0
    t_fast = t_slow = 0.0
    for seed in range(1, n + 1):
        instance = random_instance(seed, rows=rows, cols=cols)
        t0 = time.monotonic()
        fast = solve_optimal(instance)
        t_fast += time.monotonic() - t0
        t0 = time.monotonic()
        slow = brute_force_optimal(instance)
        t_slow += time.monotonic() - t0
        ok = fast.outcome == slow.outcome
        if ok and fast.is_sat:
            sat += 1
            ok = (fast.plan.objective_vector(instance.objectives)
                  == slow.plan.objective_vector(instance.objectives))
        if not ok:
            mismatches += 1
            print(f"seed {seed}: solver={fast.outcome} oracle={slow.outcome} MISMATCH")
    print(f"{n} seeds on {rows}x{cols}: {sat} sat, {mismatches} mismatches; "
          f"solver {t_fast:.2f}s, oracle {t_slow:.2f}s")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
