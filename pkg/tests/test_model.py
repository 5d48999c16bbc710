import pytest

from mapfkit import (AgentSpec, AtVertex, DONE, GridSpec, InTransit, Instance, NotAdjacentError,
                     SchemaError, UnknownAgentError, WorldGraph, battery_step, build_graph,
                     edge_duration, trajectory_occupancy)
from mapfkit.model import normalize_edge, replay_battery


class TestBuildGraph:
    def test_warehouse_slow_corridor_durations(self, warehouse):
        g = warehouse.graph
        assert edge_duration(g, 3, 4) == 2
        assert edge_duration(g, 8, 9) == 1
        assert edge_duration(g, 2, 3) == 1
        assert edge_duration(g, 17, 7) == 1

    def test_degenerate_single_cell(self):
        g = build_graph(GridSpec(rows=1, cols=1))
        assert g.vertices == frozenset({1})
        assert g.edges == {}

    def test_crossing_grid_shape(self, crossing):
        g = crossing.graph
        assert len(g.vertices) == 9
        assert len(g.edges) == 12
        assert all(d == 1 for d in g.edges.values())
        for u, v in [(1, 2), (2, 3), (3, 6), (6, 9)]:
            assert g.has_edge(u, v)

    @pytest.mark.parametrize("rows,cols", [(1, 1), (2, 2), (3, 10), (4, 4), (5, 3)])
    def test_vertex_and_edge_counts_ignore_obstacles(self, rows, cols):
        spec = GridSpec(rows=rows, cols=cols, obstacles=frozenset({1}) if rows * cols > 1 else frozenset())
        g = build_graph(spec)
        assert len(g.vertices) == rows * cols
        assert len(g.edges) == rows * (cols - 1) + cols * (rows - 1)

    def test_out_of_range_cells_name_the_field(self):
        with pytest.raises(SchemaError) as err:
            GridSpec(rows=2, cols=2, obstacles=frozenset({5}))
        assert "obstacles" in str(err.value)
        with pytest.raises(SchemaError) as err:
            GridSpec(rows=2, cols=2, charging=frozenset({0}))
        assert "charging" in str(err.value)


class TestEdgeDuration:
    def test_symmetric(self, warehouse):
        assert edge_duration(warehouse.graph, 6, 5) == 2
        assert edge_duration(warehouse.graph, 5, 6) == 2
        assert edge_duration(warehouse.graph, 4, 14) == 1

    def test_non_edge_raises(self, crossing):
        with pytest.raises(NotAdjacentError):
            edge_duration(crossing.graph, 1, 5)


class TestBatteryStep:
    def test_charge_from_one(self):
        assert battery_step(1, True, 10) == 10

    def test_drain(self):
        assert battery_step(5, False, 10) == 4

    def test_charge_at_max_idempotent(self):
        assert battery_step(10, True, 10) == 10

    def test_exhaustive_window(self):
        for bmax in range(1, 65):
            for level in range(1, bmax + 1):
                assert battery_step(level, True, bmax) == bmax
                assert battery_step(level, False, bmax) == level - 1

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            battery_step(0, False, 10)
        with pytest.raises(ValueError):
            battery_step(11, False, 10)


class TestReplay:
    def test_reference_rows(self, warehouse_plan):
        a1 = warehouse_plan.timelines["A1"]
        a2 = warehouse_plan.timelines["A2"]
        assert replay_battery(10, 18, a1.charge_times, 10) == list(a1.battery)
        assert replay_battery(8, 19, a2.charge_times, 10) == list(a2.battery)


class TestTrajectoryOccupancy:
    def test_transit_entry(self, warehouse_plan):
        assert trajectory_occupancy(warehouse_plan, "A1", 3) == InTransit(3, 4, 1)

    def test_done_occupies_goal(self, warehouse_plan):
        assert trajectory_occupancy(warehouse_plan, "A1", 18) == AtVertex(30)
        assert warehouse_plan.timelines["A1"].route[18] == DONE

    def test_initial_condition(self, warehouse_plan):
        assert trajectory_occupancy(warehouse_plan, "A1", 0) == AtVertex(1)
        assert trajectory_occupancy(warehouse_plan, "A2", 0) == AtVertex(30)

    def test_total_over_horizon(self, warehouse_plan):
        for aid in warehouse_plan.agent_ids:
            for t in range(warehouse_plan.makespan + 1):
                assert trajectory_occupancy(warehouse_plan, aid, t) is not None

    def test_unknown_agent(self, warehouse_plan):
        with pytest.raises(UnknownAgentError):
            trajectory_occupancy(warehouse_plan, "A9", 0)


class TestInvariants:
    def test_edges_reference_vertices(self):
        with pytest.raises(SchemaError):
            WorldGraph([1, 2], [(1, 3, 1)])

    def test_charging_obstacle_overlap(self):
        with pytest.raises(SchemaError):
            WorldGraph([1, 2], [(1, 2, 1)], obstacles=[1], charging=[1])

    def test_duration_floor(self):
        with pytest.raises(SchemaError):
            WorldGraph([1, 2], [(1, 2, 0)])

    def test_duplicate_starts_rejected(self, crossing):
        bad = [AgentSpec("X", 1, 9, battery_init=1), AgentSpec("Y", 1, 7, battery_init=1)]
        with pytest.raises(SchemaError) as err:
            Instance(crossing.graph, bad, battery_max=10, makespan_bound=5)
        assert "start" in str(err.value)

    def test_duplicate_goals_rejected(self, crossing):
        bad = [AgentSpec("X", 1, 9, battery_init=1), AgentSpec("Y", 3, 9, battery_init=1)]
        with pytest.raises(SchemaError):
            Instance(crossing.graph, bad, battery_max=10, makespan_bound=5)

    def test_objectives_must_start_with_makespan(self, crossing):
        with pytest.raises(SchemaError):
            Instance(crossing.graph, crossing.agents, 10, 8, objectives=("total_time",))

    def test_start_on_obstacle_rejected(self, blocked_swap):
        with pytest.raises(SchemaError):
            Instance(blocked_swap.graph, [AgentSpec("R1", 2, 3, battery_init=1)],
                     battery_max=20, makespan_bound=8)

    def test_normalize_edge(self):
        assert normalize_edge(7, 3) == (3, 7)
        assert normalize_edge(3, 7) == (3, 7)
