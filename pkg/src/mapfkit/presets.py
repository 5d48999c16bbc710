"""Showcase instances and reference plans used by the test suite, CLI demos and docs.

The warehouse obstacle cells and waypoint stars are one concrete choice
consistent with the reference trajectories below; treat them as part of this
toolkit's fixture, not as ground truth about any particular warehouse.
"""
from __future__ import annotations

from .dynamics import AgentJoin
from .model import (AgentSpec, AgentTimeline, AtVertex, DONE, GridSpec, InTransit, Instance,
                    Plan, WorldGraph, build_graph, replay_battery)


def _timeline(entries, battery_init, battery_max, charge_times, makespan, birth=0):
    route = []
    for e in entries:
        if e == "done":
            route.append(DONE)
        elif isinstance(e, tuple):
            route.append(InTransit(e[0], e[1], e[2]))
        else:
            route.append(AtVertex(e))
    completion = birth + len(entries) - 1 - sum(1 for e in entries if e == "done")
    battery = replay_battery(battery_init, completion - birth + 1,
                             frozenset(charge_times), battery_max, t0=birth)
    route.extend([DONE] * (makespan - birth + 1 - len(route)))
    return AgentTimeline(tuple(route), tuple(battery), frozenset(charge_times), birth)


def warehouse_3x10() -> Instance:
    """3x10 warehouse: slow corridor 3..8, chargers at 24 and 27, three shelf units."""
    grid = GridSpec(rows=3, cols=10,
                    obstacles=frozenset({12, 13, 15, 16, 18, 19}),
                    slow_cells=frozenset(range(3, 9)), slow_duration=2,
                    charging=frozenset({24, 27}))
    agents = [AgentSpec("A1", start=1, goal=30, waypoints=frozenset({3, 26}), battery_init=10),
              AgentSpec("A2", start=30, goal=1, waypoints=frozenset({28, 5}), battery_init=8)]
    return Instance(build_graph(grid), agents, battery_max=10, makespan_bound=18, grid=grid)


def warehouse_3x10_plan() -> Plan:
    """Reference 18-step swap: both robots cross the slow corridor and recharge twice/once."""
    a1 = [1, 2, 3, (3, 4, 1), 4, 14, 24, 25, 26, 27, 17, 7, (7, 8, 1), 8, 9, 10, 20, 30, "done"]
    a2 = [30, 29, 28, 27, 17, 7, (7, 6, 1), 6, (6, 5, 1), 5, (5, 4, 1), 4, 14, 24, 23, 22, 21, 11, 1]
    return Plan(18, {"A1": _timeline(a1, 10, 10, {9}, 18),
                     "A2": _timeline(a2, 8, 10, {3, 13}, 18)})


def crossing_3x3() -> Instance:
    """Bare 3x3 crossing used for dynamic joins: two agents swapping corners."""
    grid = GridSpec(rows=3, cols=3)
    agents = [AgentSpec("A1", start=1, goal=9, battery_init=10),
              AgentSpec("A2", start=3, goal=7, battery_init=10)]
    return Instance(build_graph(grid), agents, battery_max=10, makespan_bound=8, grid=grid)


def crossing_3x3_events() -> list[AgentJoin]:
    return [AgentJoin(1, AgentSpec("A3", start=9, goal=2, battery_init=10)),
            AgentJoin(2, AgentSpec("A4", start=7, goal=1, battery_init=10))]


def wait_query_world() -> Instance:
    """Small graph where both robots funnel through waypoint cell 7."""
    graph = WorldGraph(vertices=[2, 5, 6, 7, 8, 11],
                       edges=[(7, 11, 1), (7, 8, 1), (6, 7, 1), (5, 6, 1), (2, 6, 1)])
    agents = [AgentSpec("A1", start=11, goal=5, waypoints=frozenset({7}), battery_init=10),
              AgentSpec("A2", start=8, goal=2, waypoints=frozenset({7}), battery_init=10)]
    return Instance(graph, agents, battery_max=10, makespan_bound=4)


def wait_query_plan_initial_wait() -> Plan:
    """Optimal plan where the second robot waits one step before following."""
    return Plan(4, {"A1": _timeline([11, 7, 6, 5, "done"], 10, 10, (), 4),
                    "A2": _timeline([8, 8, 7, 6, 2], 10, 10, (), 4)})


def wait_query_plan_no_wait() -> Plan:
    """The alternative optimum: the first robot yields instead."""
    return Plan(4, {"A1": _timeline([11, 11, 7, 6, 5], 10, 10, (), 4),
                    "A2": _timeline([8, 7, 6, 2, "done"], 10, 10, (), 4)})


def blocked_swap_3x3() -> Instance:
    """3x3 with cells 2 and 5 shelved: the corridor 1-4-7-8-9-6-3 cannot host a swap."""
    grid = GridSpec(rows=3, cols=3, obstacles=frozenset({2, 5}))
    agents = [AgentSpec("R1", start=1, goal=3, battery_init=20),
              AgentSpec("R2", start=3, goal=1, battery_init=20)]
    return Instance(build_graph(grid), agents, battery_max=20, makespan_bound=8, grid=grid)
