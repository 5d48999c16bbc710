"""Canonical file formats for instances, plans, events, reports and explanations.

Serialization is canonical: sorted keys, compact separators, stable list
orders, one trailing newline. Fixture and golden files round-trip byte for
byte. Parsing reports field-addressed schema errors ("$.agents[0].start").
"""
from __future__ import annotations

import json
from typing import Any, Optional

from .dynamics import (AgentJoin, AgentLeave, DynamicResult, Event, ObstacleAdd, ObstacleMove,
                       ObstacleRemove)
from .errors import SchemaError
from .explain import (AlternativePlan, CounterfactualConflict, DelayedItinerary, Explanation,
                      FeasibilityConfirmed, InfeasibilityReport, OptimalityGap,
                      RelaxationSuggestion)
from .model import (AgentSpec, AgentTimeline, AtVertex, DONE, Done, GridSpec, InTransit,
                    Instance, Plan, WorldGraph, build_graph, edge_duration)
from .solver import SolveResult


def dumps_canonical(obj: Any) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def _loads(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg} at position {e.pos}") from None


def _need(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return obj[key]


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {value!r}")
    return value


def _int_list(value: Any, path: str) -> list[int]:
    if not isinstance(value, list):
        raise SchemaError(path, "expected a list of integers")
    return [_int(v, f"{path}[{i}]") for i, v in enumerate(value)]


# ---------------------------------------------------------------------------
# instances

def instance_from_json(doc: Any, path: str = "$") -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    has_grid, has_graph = "grid" in doc, "graph" in doc
    if has_grid == has_graph:
        raise SchemaError(path, "exactly one of 'grid' or 'graph' must be present")
    grid = None
    if has_grid:
        g = doc["grid"]
        grid = GridSpec(rows=_int(_need(g, "rows", f"{path}.grid"), f"{path}.grid.rows"),
                        cols=_int(_need(g, "cols", f"{path}.grid"), f"{path}.grid.cols"),
                        obstacles=frozenset(_int_list(g.get("obstacles", []), f"{path}.grid.obstacles")),
                        slow_cells=frozenset(_int_list(g.get("slow_cells", []), f"{path}.grid.slow_cells")),
                        slow_duration=_int(g.get("slow_duration", 2), f"{path}.grid.slow_duration"),
                        charging=frozenset(_int_list(g.get("charging", []), f"{path}.grid.charging")))
        graph = build_graph(grid)
    else:
        g = doc["graph"]
        vertices = _int_list(_need(g, "vertices", f"{path}.graph"), f"{path}.graph.vertices")
        raw_edges = _need(g, "edges", f"{path}.graph")
        if not isinstance(raw_edges, list):
            raise SchemaError(f"{path}.graph.edges", "expected a list")
        edges = []
        for i, e in enumerate(raw_edges):
            ep = f"{path}.graph.edges[{i}]"
            edges.append((_int(_need(e, "u", ep), f"{ep}.u"),
                          _int(_need(e, "v", ep), f"{ep}.v"),
                          _int(e.get("duration", 1), f"{ep}.duration")))
        graph = WorldGraph(vertices, edges,
                           obstacles=_int_list(g.get("obstacles", []), f"{path}.graph.obstacles"),
                           charging=_int_list(g.get("charging", []), f"{path}.graph.charging"))

    raw_agents = _need(doc, "agents", path)
    if not isinstance(raw_agents, list):
        raise SchemaError(f"{path}.agents", "expected a list")
    agents = []
    for i, a in enumerate(raw_agents):
        ap = f"{path}.agents[{i}]"
        aid = _need(a, "id", ap)
        if not isinstance(aid, str) or not aid:
            raise SchemaError(f"{ap}.id", "agent id must be a non-empty string")
        agents.append(AgentSpec(
            id=aid,
            start=_int(_need(a, "start", ap), f"{ap}.start"),
            goal=_int(_need(a, "goal", ap), f"{ap}.goal"),
            waypoints=frozenset(_int_list(a.get("waypoints", []), f"{ap}.waypoints")),
            battery_init=_int(_need(a, "battery", ap), f"{ap}.battery")))
    objectives = doc.get("objectives", list(("makespan", "total_time", "charges")))
    if not isinstance(objectives, list) or not all(isinstance(o, str) for o in objectives):
        raise SchemaError(f"{path}.objectives", "expected a list of strings")
    return Instance(graph, agents,
                    battery_max=_int(_need(doc, "battery_max", path), f"{path}.battery_max"),
                    makespan_bound=_int(_need(doc, "makespan_bound", path), f"{path}.makespan_bound"),
                    objectives=tuple(objectives), grid=grid)


def instance_to_json(instance: Instance) -> dict:
    if instance.grid is not None:
        g = instance.grid
        world = {"grid": {"rows": g.rows, "cols": g.cols, "obstacles": sorted(g.obstacles),
                          "slow_cells": sorted(g.slow_cells), "slow_duration": g.slow_duration,
                          "charging": sorted(g.charging)}}
    else:
        gr = instance.graph
        world = {"graph": {"vertices": sorted(gr.vertices),
                           "edges": [{"u": u, "v": v, "duration": d}
                                     for (u, v), d in sorted(gr.edges.items())],
                           "obstacles": sorted(gr.obstacles),
                           "charging": sorted(gr.charging)}}
    return {**world,
            "battery_max": instance.battery_max,
            "agents": [{"id": a.id, "start": a.start, "goal": a.goal,
                        "waypoints": sorted(a.waypoints), "battery": a.battery_init}
                       for a in instance.agents],
            "makespan_bound": instance.makespan_bound,
            "objectives": list(instance.objectives)}


def parse_instance(data: bytes | str) -> Instance:
    return instance_from_json(_loads(data))


def serialize_instance(instance: Instance) -> bytes:
    return dumps_canonical(instance_to_json(instance))


# ---------------------------------------------------------------------------
# plans

def _state_from_json(entry: Any, path: str, instance: Optional[Instance]):
    if entry == "done":
        return DONE
    if not isinstance(entry, dict):
        raise SchemaError(path, f"expected a state object or 'done', got {entry!r}")
    if "at" in entry:
        return AtVertex(_int(entry["at"], f"{path}.at"))
    if "transit" in entry:
        pair = _int_list(entry["transit"], f"{path}.transit")
        if len(pair) != 2:
            raise SchemaError(f"{path}.transit", "expected [u, v]")
        step = _int(_need(entry, "step", path), f"{path}.step")
        if step < 1:
            raise SchemaError(f"{path}.step", "step must be >= 1")
        if instance is not None:
            if not instance.graph.has_edge(*pair):
                raise SchemaError(f"{path}.transit", f"no edge {pair[0]}-{pair[1]}")
            d = edge_duration(instance.graph, *pair)
            if step >= d:
                raise SchemaError(f"{path}.step",
                                  f"step must be < duration {d} of edge {pair[0]}-{pair[1]}")
        return InTransit(pair[0], pair[1], step)
    raise SchemaError(path, "state must be {'at': v}, {'transit': [u,v], 'step': k} or 'done'")


def plan_from_json(doc: Any, instance: Optional[Instance] = None, path: str = "$") -> Plan:
    makespan = _int(_need(doc, "makespan", path), f"{path}.makespan")
    if makespan < 0:
        raise SchemaError(f"{path}.makespan", "makespan must be >= 0")
    raw_agents = _need(doc, "agents", path)
    if not isinstance(raw_agents, dict):
        raise SchemaError(f"{path}.agents", "expected an object keyed by agent id")
    timelines = {}
    order = list(raw_agents)
    if instance is not None:
        known = [a for a in instance.agent_ids if a in raw_agents]
        order = known + sorted(set(raw_agents) - set(known))
    for aid in order:
        body = raw_agents[aid]
        ap = f"{path}.agents.{aid}"
        birth = _int(body.get("joined_at", 0), f"{ap}.joined_at")
        if birth < 0 or birth > makespan:
            raise SchemaError(f"{ap}.joined_at", f"joined_at {birth} outside 0..{makespan}")
        raw_route = _need(body, "route", ap)
        if not isinstance(raw_route, list):
            raise SchemaError(f"{ap}.route", "expected a list of states")
        if len(raw_route) != makespan - birth + 1:
            raise SchemaError(f"{ap}.route",
                              f"route must hold {makespan - birth + 1} entries "
                              f"(makespan {makespan}, joined_at {birth}), got {len(raw_route)}")
        route = []
        seen_done = False
        for i, entry in enumerate(raw_route):
            state = _state_from_json(entry, f"{ap}.route[{i}]", instance)
            if isinstance(state, Done):
                seen_done = True
            elif seen_done:
                raise SchemaError(f"{ap}.route[{i}]", "'done' entries must close the route")
            route.append(state)
        battery = _int_list(_need(body, "battery", ap), f"{ap}.battery")
        charge_times = frozenset(_int_list(body.get("charge_times", []), f"{ap}.charge_times"))
        timelines[aid] = AgentTimeline(tuple(route), tuple(battery), charge_times, birth)
    return Plan(makespan, timelines)


def plan_to_json(plan: Plan) -> dict:
    agents = {}
    for aid in sorted(plan.timelines):
        tl = plan.timelines[aid]
        route = []
        for state in tl.route:
            if isinstance(state, AtVertex):
                route.append({"at": state.v})
            elif isinstance(state, InTransit):
                route.append({"transit": [state.u, state.v], "step": state.step})
            else:
                route.append("done")
        body = {"route": route, "battery": list(tl.battery),
                "charge_times": sorted(tl.charge_times)}
        if tl.birth > 0:
            body["joined_at"] = tl.birth
        agents[aid] = body
    return {"makespan": plan.makespan, "agents": agents}


def parse_plan(data: bytes | str, instance: Optional[Instance] = None) -> Plan:
    return plan_from_json(_loads(data), instance)


def serialize_plan(plan: Plan) -> bytes:
    return dumps_canonical(plan_to_json(plan))


# ---------------------------------------------------------------------------
# events

def event_from_json(doc: Any, path: str = "$") -> Event:
    kind = _need(doc, "kind", path)
    t = _int(_need(doc, "time", path), f"{path}.time")
    if kind == "agent_join":
        a = _need(doc, "agent", path)
        ap = f"{path}.agent"
        spec = AgentSpec(id=_need(a, "id", ap),
                         start=_int(_need(a, "start", ap), f"{ap}.start"),
                         goal=_int(_need(a, "goal", ap), f"{ap}.goal"),
                         waypoints=frozenset(_int_list(a.get("waypoints", []), f"{ap}.waypoints")),
                         battery_init=_int(_need(a, "battery", ap), f"{ap}.battery"))
        return AgentJoin(t, spec)
    if kind == "agent_leave":
        return AgentLeave(t, _need(doc, "id", path))
    if kind == "obstacle_add":
        return ObstacleAdd(t, _int(_need(doc, "vertex", path), f"{path}.vertex"))
    if kind == "obstacle_remove":
        return ObstacleRemove(t, _int(_need(doc, "vertex", path), f"{path}.vertex"))
    if kind == "obstacle_move":
        return ObstacleMove(t, _int(_need(doc, "from", path), f"{path}.from"),
                            _int(_need(doc, "to", path), f"{path}.to"))
    raise SchemaError(f"{path}.kind", f"unknown event kind {kind!r}")


def event_to_json(event: Event) -> dict:
    if isinstance(event, AgentJoin):
        s = event.spec
        return {"kind": "agent_join", "time": event.time,
                "agent": {"id": s.id, "start": s.start, "goal": s.goal,
                          "waypoints": sorted(s.waypoints), "battery": s.battery_init}}
    if isinstance(event, AgentLeave):
        return {"kind": "agent_leave", "time": event.time, "id": event.agent_id}
    if isinstance(event, ObstacleAdd):
        return {"kind": "obstacle_add", "time": event.time, "vertex": event.vertex}
    if isinstance(event, ObstacleRemove):
        return {"kind": "obstacle_remove", "time": event.time, "vertex": event.vertex}
    return {"kind": "obstacle_move", "time": event.time, "from": event.src, "to": event.dst}


def parse_events(data: bytes | str) -> list[Event]:
    doc = _loads(data)
    raw = _need(doc, "events", "$")
    if not isinstance(raw, list):
        raise SchemaError("$.events", "expected a list")
    return [event_from_json(e, f"$.events[{i}]") for i, e in enumerate(raw)]


def serialize_events(events: list[Event]) -> bytes:
    return dumps_canonical({"events": [event_to_json(e) for e in events]})


# ---------------------------------------------------------------------------
# results and explanations

def solve_result_to_json(res: SolveResult, include_wall_time: bool = False) -> dict:
    body = {"outcome": res.outcome, "stats": res.stats.to_json(include_wall_time)}
    if res.plan is not None:
        body["plan"] = plan_to_json(res.plan)
    return body


def dynamic_result_to_json(res: DynamicResult, include_wall_time: bool = False) -> dict:
    body = {"outcome": res.outcome, "method": res.method, "horizon_used": res.horizon_used,
            "stats": res.stats.to_json(include_wall_time)}
    if res.plan is not None:
        body["plan"] = plan_to_json(res.plan)
    return body


def explanation_to_json(exp: Explanation) -> dict:
    if isinstance(exp, AlternativePlan):
        return {"kind": exp.kind, "message": exp.message, "plan": plan_to_json(exp.plan)}
    if isinstance(exp, DelayedItinerary):
        return {"kind": exp.kind, "message": exp.message, "delay": exp.delay,
                "plan": plan_to_json(exp.plan)}
    if isinstance(exp, CounterfactualConflict):
        return {"kind": exp.kind, "message": exp.message,
                "violation": exp.violation.to_json(),
                "counterfactual_plan": plan_to_json(exp.counterfactual_plan)}
    if isinstance(exp, RelaxationSuggestion):
        return {"kind": exp.kind, "message": exp.message,
                "relaxation": exp.relaxation.to_json(),
                "witness_plan": plan_to_json(exp.witness_plan),
                "first_violation": exp.first_violation.to_json()}
    if isinstance(exp, OptimalityGap):
        return {"kind": exp.kind, "message": exp.message, "time_delta": exp.time_delta,
                "charge_delta": exp.charge_delta, "optimal_plan": plan_to_json(exp.optimal_plan)}
    if isinstance(exp, FeasibilityConfirmed):
        return {"kind": exp.kind, "message": exp.message,
                "better_plans": [plan_to_json(p) for p in exp.better_plans]}
    if isinstance(exp, InfeasibilityReport):
        return {"kind": exp.kind, "message": exp.message, "categories": list(exp.categories),
                "violations": [v.to_json() for v in exp.violations]}
    raise TypeError(f"unknown explanation {exp!r}")


# ---------------------------------------------------------------------------
# ascii grids

def parse_ascii_grid(text: str) -> GridSpec:
    """Hand-authoring format: '.' free, '#' obstacle, 'c' charging, digit = slow cell.

    All digit cells must carry the same digit, which becomes the slow duration.
    """
    rows = [line.rstrip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise SchemaError("$", "empty grid")
    width = len(rows[0])
    obstacles, slow_cells, charging = set(), set(), set()
    slow_duration = None
    for r, line in enumerate(rows):
        if len(line) != width:
            raise SchemaError(f"$[{r}]", f"row length {len(line)} != {width}")
        for c, ch in enumerate(line):
            cell = r * width + c + 1
            if ch == ".":
                continue
            if ch == "#":
                obstacles.add(cell)
            elif ch in "cC":
                charging.add(cell)
            elif ch.isdigit():
                d = int(ch)
                if d < 2:
                    raise SchemaError(f"$[{r}][{c}]", "slow duration digits must be >= 2")
                if slow_duration is not None and slow_duration != d:
                    raise SchemaError(f"$[{r}][{c}]",
                                      f"conflicting slow durations {slow_duration} and {d}")
                slow_duration = d
                slow_cells.add(cell)
            else:
                raise SchemaError(f"$[{r}][{c}]", f"unknown cell character {ch!r}")
    return GridSpec(rows=len(rows), cols=width, obstacles=frozenset(obstacles),
                    slow_cells=frozenset(slow_cells), slow_duration=slow_duration or 2,
                    charging=frozenset(charging))
