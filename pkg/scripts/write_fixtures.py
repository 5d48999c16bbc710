#!/usr/bin/env python3
"""Regenerate the canonical fixture files under fixtures/ from the preset builders.

Run after changing presets or the serialization format; tests assert the files
stay byte-identical to what the builders produce.
"""
from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from mapfkit import formats, presets  # noqa: E402

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    files = {
        "warehouse_3x10.json": formats.serialize_instance(presets.warehouse_3x10()),
        "warehouse_3x10_plan.json": formats.serialize_plan(presets.warehouse_3x10_plan()),
        "crossing_3x3.json": formats.serialize_instance(presets.crossing_3x3()),
        "crossing_3x3_events.json": formats.serialize_events(presets.crossing_3x3_events()),
        "wait_query.json": formats.serialize_instance(presets.wait_query_world()),
        "wait_query_plan1.json": formats.serialize_plan(presets.wait_query_plan_initial_wait()),
        "wait_query_plan2.json": formats.serialize_plan(presets.wait_query_plan_no_wait()),
        "blocked_swap.json": formats.serialize_instance(presets.blocked_swap_3x3()),
    }
    for name, data in sorted(files.items()):
        path = FIXTURES / name
        path.write_bytes(data)
        print(f"wrote {path} ({len(data)} bytes)")


if __name__ == "__main__":
    main()
