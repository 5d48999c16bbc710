#!/usr/bin/env python3
"""Regenerate the byte-frozen golden outputs under tests/golden/.

Each golden is the exact stdout of one CLI invocation on a fixture file.
Regenerate only when an intentional output change happens, then review the
diff; determinism tests compare fresh runs against these bytes.
"""
from __future__ import annotations

import contextlib
import io
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from mapfkit.cli import main  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"
FIX = ROOT / "fixtures"

CASES = {
    "wait_query_solve.json": ["solve", str(FIX / "wait_query.json")],
    "warehouse_solve.json": ["solve", str(FIX / "warehouse_3x10.json")],
    "wait_query_whywait.json": ["explain", str(FIX / "wait_query.json"),
                                "--plan", str(FIX / "wait_query_plan1.json"),
                                "--why-wait", "A2:8"],
    "blocked_swap_whyinfeasible.json": ["explain", str(FIX / "blocked_swap.json"),
                                        "--why-infeasible"],
    "crossing_dynamic.json": ["dynamic", str(FIX / "crossing_3x3.json"),
                              "--events", str(FIX / "crossing_3x3_events.json")],
    "warehouse_validate.json": ["validate", str(FIX / "warehouse_3x10.json"),
                                str(FIX / "warehouse_3x10_plan.json")],
}


def run(argv: list[str]) -> bytes:
    buf = io.BytesIO()
    out = io.TextIOWrapper(buf, encoding="utf-8")
    with contextlib.redirect_stdout(out):
        rc = main(argv)
    out.flush()
    if rc != 0:
        raise SystemExit(f"{argv} exited {rc}")
    return buf.getvalue()


def main_() -> None:
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in sorted(CASES.items()):
        data = run(argv)
        (GOLDEN / name).write_bytes(data)
        print(f"wrote tests/golden/{name} ({len(data)} bytes)")


if __name__ == "__main__":
    main_()
