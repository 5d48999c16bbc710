import json

import pytest

from mapfkit import GridSpec, SchemaError
from mapfkit import formats, presets
from conftest import FIXTURES


class TestInstanceRoundTrip:
    def test_warehouse_file_parses(self):
        inst = formats.parse_instance((FIXTURES / "warehouse_3x10.json").read_bytes())
        assert inst.battery_max == 10
        assert inst.graph.charging == frozenset({24, 27})
        assert inst.makespan_bound == 18
        assert inst == presets.warehouse_3x10()

    def test_crossing_file_bytes_roundtrip(self):
        data = (FIXTURES / "crossing_3x3.json").read_bytes()
        assert formats.serialize_instance(formats.parse_instance(data)) == data

    def test_graph_world_roundtrip(self, wait_query):
        data = formats.serialize_instance(wait_query)
        again = formats.parse_instance(data)
        assert again == wait_query
        assert formats.serialize_instance(again) == data

    def test_both_grid_and_graph_rejected(self):
        doc = json.loads((FIXTURES / "crossing_3x3.json").read_text())
        doc["graph"] = {"vertices": [1], "edges": []}
        with pytest.raises(SchemaError) as err:
            formats.parse_instance(json.dumps(doc))
        assert err.value.path == "$"

    def test_field_addressed_error(self):
        doc = json.loads((FIXTURES / "crossing_3x3.json").read_text())
        doc["agents"][0]["start"] = "one"
        with pytest.raises(SchemaError) as err:
            formats.parse_instance(json.dumps(doc))
        assert err.value.path == "$.agents[0].start"

    def test_invalid_json(self):
        with pytest.raises(SchemaError):
            formats.parse_instance(b"{nope")

    def test_objectives_default_to_the_full_order(self):
        doc = json.loads((FIXTURES / "crossing_3x3.json").read_text())
        del doc["objectives"]
        inst = formats.parse_instance(json.dumps(doc))
        assert inst.objectives == ("makespan", "total_time", "charges")

    def test_all_fixture_files_roundtrip(self):
        for name in ("warehouse_3x10.json", "crossing_3x3.json", "wait_query.json",
                     "blocked_swap.json"):
            data = (FIXTURES / name).read_bytes()
            assert formats.serialize_instance(formats.parse_instance(data)) == data, name


class TestPlanRoundTrip:
    def test_reference_battery_row_from_file(self, warehouse):
        plan = formats.parse_plan((FIXTURES / "warehouse_3x10_plan.json").read_bytes(), warehouse)
        assert plan.timelines["A2"].battery == (8, 7, 6, 5, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1,
                                                10, 9, 8, 7, 6)

    def test_plan_bytes_roundtrip(self, warehouse):
        data = (FIXTURES / "warehouse_3x10_plan.json").read_bytes()
        plan = formats.parse_plan(data, warehouse)
        assert formats.serialize_plan(plan) == data

    def test_wait_query_plans_roundtrip(self, wait_query, plan1, plan2):
        for plan in (plan1, plan2):
            data = formats.serialize_plan(plan)
            assert formats.parse_plan(data, wait_query) == plan

    def test_transit_step_must_stay_below_duration(self, warehouse):
        doc = json.loads((FIXTURES / "warehouse_3x10_plan.json").read_text())
        doc["agents"]["A1"]["route"][3] = {"transit": [3, 4], "step": 2}
        with pytest.raises(SchemaError) as err:
            formats.parse_plan(json.dumps(doc), warehouse)
        assert "step" in err.value.path

    def test_done_must_be_a_suffix(self, wait_query):
        doc = {"makespan": 2, "agents": {"A1": {"route": [{"at": 11}, "done", {"at": 11}],
                                                "battery": [10], "charge_times": []},
                                         "A2": {"route": [{"at": 8}, {"at": 8}, {"at": 8}],
                                                "battery": [10, 9, 8], "charge_times": []}}}
        with pytest.raises(SchemaError):
            formats.plan_from_json(doc, wait_query)

    def test_route_length_checked(self, wait_query):
        doc = {"makespan": 4, "agents": {"A1": {"route": [{"at": 11}], "battery": [10],
                                                "charge_times": []}}}
        with pytest.raises(SchemaError) as err:
            formats.plan_from_json(doc, wait_query)
        assert "route" in err.value.path

    def test_joined_at_roundtrip(self, crossing):
        from mapfkit import resolve_dynamic, apply_event, begin_execution, solve_optimal
        plan = solve_optimal(crossing).plan
        state = apply_event(begin_execution(crossing, plan), presets.crossing_3x3_events()[0])
        res = resolve_dynamic(state)
        data = formats.serialize_plan(res.plan)
        doc = json.loads(data)
        assert doc["agents"]["A3"]["joined_at"] == 1
        assert "joined_at" not in doc["agents"]["A1"]
        again = formats.parse_plan(data, state.instance)
        assert again == res.plan


class TestEvents:
    def test_events_file_roundtrip(self):
        data = (FIXTURES / "crossing_3x3_events.json").read_bytes()
        events = formats.parse_events(data)
        assert formats.serialize_events(events) == data
        assert [e.time for e in events] == [1, 2]

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            formats.parse_events(b'{"events":[{"kind":"meteor","time":0}]}')


class TestAsciiImport:
    def test_grid_with_everything(self):
        text = "..22..\n#.22.c\n......"
        grid = formats.parse_ascii_grid(text)
        assert grid == GridSpec(rows=3, cols=6, obstacles=frozenset({7}),
                                slow_cells=frozenset({3, 4, 9, 10}), slow_duration=2,
                                charging=frozenset({12}))

    def test_ragged_rows_rejected(self):
        with pytest.raises(SchemaError):
            formats.parse_ascii_grid("..\n...")

    def test_conflicting_slow_digits_rejected(self):
        with pytest.raises(SchemaError):
            formats.parse_ascii_grid("23")

    def test_unknown_character_rejected(self):
        with pytest.raises(SchemaError):
            formats.parse_ascii_grid(".x")


class TestFixturesMatchPresets:
    def test_fixture_files_are_regenerable(self):
        pairs = {
            "warehouse_3x10.json": formats.serialize_instance(presets.warehouse_3x10()),
            "warehouse_3x10_plan.json": formats.serialize_plan(presets.warehouse_3x10_plan()),
            "crossing_3x3.json": formats.serialize_instance(presets.crossing_3x3()),
            "crossing_3x3_events.json": formats.serialize_events(presets.crossing_3x3_events()),
            "wait_query.json": formats.serialize_instance(presets.wait_query_world()),
            "wait_query_plan1.json": formats.serialize_plan(presets.wait_query_plan_initial_wait()),
            "wait_query_plan2.json": formats.serialize_plan(presets.wait_query_plan_no_wait()),
            "blocked_swap.json": formats.serialize_instance(presets.blocked_swap_3x3()),
        }
        for name, blob in pairs.items():
            assert (FIXTURES / name).read_bytes() == blob, name
