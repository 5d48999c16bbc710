"""Feasibility checking: turns a plan into a complete, ordered violation list."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import (AgentTimeline, AtVertex, Done, InTransit, Instance, Plan, Vertex, Violation,
                    ViolationKind, edge_duration, normalize_edge, replay_battery,
                    trajectory_occupancy)

CATEGORY_COLLISIONS = "collisions with obstacles or other robots"
CATEGORY_BATTERY = "low battery-level"
CATEGORY_INCOMPLETE = "task incomplete"

_CATEGORY_OF = {
    ViolationKind.VERTEX_CONFLICT: CATEGORY_COLLISIONS,
    ViolationKind.SWAP_CONFLICT: CATEGORY_COLLISIONS,
    ViolationKind.EDGE_OVERLAP_CONFLICT: CATEGORY_COLLISIONS,
    ViolationKind.OBSTACLE_COLLISION: CATEGORY_COLLISIONS,
    ViolationKind.BATTERY_DEPLETED: CATEGORY_BATTERY,
    ViolationKind.WAYPOINT_MISSED: CATEGORY_INCOMPLETE,
    ViolationKind.GOAL_MISSED: CATEGORY_INCOMPLETE,
    ViolationKind.HORIZON_EXCEEDED: CATEGORY_INCOMPLETE,
    ViolationKind.DISCONTINUITY: CATEGORY_INCOMPLETE,
}
_CATEGORY_ORDER = (CATEGORY_COLLISIONS, CATEGORY_BATTERY, CATEGORY_INCOMPLETE)

INTER_AGENT_KINDS = frozenset({ViolationKind.VERTEX_CONFLICT, ViolationKind.SWAP_CONFLICT,
                               ViolationKind.EDGE_OVERLAP_CONFLICT})


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    summary: dict = field(compare=False)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"feasible": self.feasible,
                "summary": dict(sorted(self.summary.items())),
                "violations": [v.to_json() for v in self.violations]}


def _report(found: list[Violation]) -> ValidationReport:
    ordered = tuple(sorted(set(found), key=Violation.sort_key))
    summary: dict[str, int] = {}
    for v in ordered:
        summary[v.kind.value] = summary.get(v.kind.value, 0) + 1
    return ValidationReport(ordered, summary)


def validate(instance: Instance, plan: Plan, relax=None, obstacles_from: int = 0) -> ValidationReport:
    """Apply every feasibility rule and return all violations, sorted.

    ``relax`` (a solver Relaxation) disables the corresponding rule families so
    witness plans can be checked under the relaxation that produced them.
    ``obstacles_from`` exempts obstacle contact before that time: committed
    history written before an obstacle landed is not retroactively wrong.
    Structurally broken timelines yield discontinuity violations instead of
    hard failures so callers can always render a report.
    """
    found: list[Violation] = []
    graph = instance.graph
    ignore_collisions = bool(relax and relax.ignore_agent_collisions)
    ignored_obstacles = frozenset(relax.ignored_obstacles) if relax else frozenset()
    unlimited_battery = bool(relax and relax.unlimited_battery)
    bound = instance.makespan_bound + (relax.extra_horizon if relax else 0)
    obstacles = graph.obstacles - ignored_obstacles

    plan_ids = set(plan.timelines)
    instance_ids = set(instance.agent_ids)
    for missing in sorted(instance_ids - plan_ids):
        found.append(Violation(ViolationKind.DISCONTINUITY, (missing,), None, 0))
    for extra in sorted(plan_ids - instance_ids):
        found.append(Violation(ViolationKind.DISCONTINUITY, (extra,), None, 0))

    shared = [a for a in instance.agents if a.id in plan_ids]
    broken: set[str] = set()
    for spec in shared:
        tl = plan.timelines[spec.id]
        found.extend(_check_structure(instance, spec, tl, plan.makespan, broken))

    sound = [a for a in shared if a.id not in broken]
    for spec in sound:
        tl = plan.timelines[spec.id]
        found.extend(_check_route(instance, spec, tl, obstacles, obstacles_from))
        found.extend(_check_tasks(instance, spec, tl, bound))
        if not unlimited_battery:
            found.extend(_check_battery(instance, spec, tl))
    if sound and plan.makespan > bound and not any(
            v.kind is ViolationKind.HORIZON_EXCEEDED for v in found):
        first = sound[0]
        found.append(Violation(ViolationKind.HORIZON_EXCEEDED, (first.id,), first.goal, plan.makespan))

    if not ignore_collisions:
        found.extend(_check_conflicts(instance, plan, [a.id for a in sound]))

    return _report(found)


def categorize(report: ValidationReport) -> list[str]:
    """Map violation kinds onto headline categories, deterministically ordered."""
    present = {_CATEGORY_OF[v.kind] for v in report.violations}
    return [c for c in _CATEGORY_ORDER if c in present]


# ---------------------------------------------------------------------------
# rule groups

def _check_structure(instance: Instance, spec, tl: AgentTimeline, makespan: int,
                     broken: set[str]) -> list[Violation]:
    """Shape checks; agents failing these are excluded from the deeper rules."""
    out: list[Violation] = []

    def fail(where, time):
        out.append(Violation(ViolationKind.DISCONTINUITY, (spec.id,), where, time))
        broken.add(spec.id)

    expected_len = makespan - tl.birth + 1
    if tl.birth < 0 or tl.birth > makespan or len(tl.route) != expected_len:
        fail(None, tl.birth if tl.birth >= 0 else 0)
        return out
    seen_done = False
    for i, state in enumerate(tl.route):
        t = tl.birth + i
        if isinstance(state, Done):
            seen_done = True
            continue
        if seen_done:  # Done entries must form a suffix
            fail(None, t)
            return out
        if isinstance(state, AtVertex):
            if state.v not in instance.graph.vertices:
                fail(state.v, t)
                return out
        elif isinstance(state, InTransit):
            if not instance.graph.has_edge(state.u, state.v):
                fail(normalize_edge(state.u, state.v), t)
                return out
            d = edge_duration(instance.graph, state.u, state.v)
            if not 1 <= state.step < d:
                fail(normalize_edge(state.u, state.v), t)
                return out
        else:
            fail(None, t)
            return out
    first = tl.route[0]
    if not (isinstance(first, AtVertex) and first.v == spec.start):
        fail(spec.start, tl.birth)
    return out


def _legal_step(graph, prev, cur) -> bool:
    if isinstance(prev, AtVertex) and isinstance(cur, AtVertex):
        if prev.v == cur.v:
            return True
        return graph.has_edge(prev.v, cur.v) and edge_duration(graph, prev.v, cur.v) == 1
    if isinstance(prev, AtVertex) and isinstance(cur, InTransit):
        return (cur.u == prev.v and cur.step == 1 and graph.has_edge(cur.u, cur.v)
                and edge_duration(graph, cur.u, cur.v) >= 2)
    if isinstance(prev, InTransit) and isinstance(cur, InTransit):
        return (prev.u, prev.v) == (cur.u, cur.v) and cur.step == prev.step + 1
    if isinstance(prev, InTransit) and isinstance(cur, AtVertex):
        return cur.v == prev.v and prev.step == edge_duration(graph, prev.u, prev.v) - 1
    return False


def _check_route(instance: Instance, spec, tl: AgentTimeline, obstacles,
                 obstacles_from: int = 0) -> list[Violation]:
    out: list[Violation] = []
    graph = instance.graph
    completion = tl.completion
    prev = None
    prev_on_obstacle: Optional[Vertex] = None
    prev_transit_blocked = False
    for i, state in enumerate(tl.route):
        t = tl.birth + i
        if isinstance(state, Done):
            break
        if prev is not None and not _legal_step(graph, prev, state):
            where = state.v if isinstance(state, AtVertex) else normalize_edge(state.u, state.v)
            out.append(Violation(ViolationKind.DISCONTINUITY, (spec.id,), where, t))
        if isinstance(state, AtVertex):
            on = state.v if state.v in obstacles and t >= obstacles_from else None
            if on is not None and on != prev_on_obstacle:
                out.append(Violation(ViolationKind.OBSTACLE_COLLISION, (spec.id,), on, t))
            prev_on_obstacle = on
            prev_transit_blocked = False
        else:
            hit = (state.u in obstacles or state.v in obstacles) and t >= obstacles_from
            if hit and not prev_transit_blocked:
                out.append(Violation(ViolationKind.OBSTACLE_COLLISION, (spec.id,),
                                     normalize_edge(state.u, state.v), t))
            prev_transit_blocked = hit
            prev_on_obstacle = None
        prev = state
        if t == completion:
            break
    return out


def _check_tasks(instance: Instance, spec, tl: AgentTimeline, bound: int) -> list[Violation]:
    out: list[Violation] = []
    completion = tl.completion
    last = tl.route[completion - tl.birth] if completion >= tl.birth else None
    at_goal = isinstance(last, AtVertex) and last.v == spec.goal
    if not at_goal:
        out.append(Violation(ViolationKind.GOAL_MISSED, (spec.id,), spec.goal, None))
    elif completion > bound:
        out.append(Violation(ViolationKind.HORIZON_EXCEEDED, (spec.id,), spec.goal, completion))
    visited = {s.v for s in tl.route if isinstance(s, AtVertex)}
    for w in sorted(spec.waypoints - visited):
        out.append(Violation(ViolationKind.WAYPOINT_MISSED, (spec.id,), w, None))
    return out


def _check_battery(instance: Instance, spec, tl: AgentTimeline) -> list[Violation]:
    out: list[Violation] = []
    completion = max(tl.completion, tl.birth)
    graph = instance.graph
    for t in sorted(tl.charge_times):
        i = t - tl.birth
        ok = (tl.birth <= t < completion and i < len(tl.route)
              and isinstance(tl.route[i], AtVertex) and tl.route[i].v in graph.charging)
        if not ok:
            where = tl.route[i].v if 0 <= i < len(tl.route) and isinstance(tl.route[i], AtVertex) else None
            out.append(Violation(ViolationKind.DISCONTINUITY, (spec.id,), where, max(t, tl.birth)))
    expected = replay_battery(spec.battery_init, completion - tl.birth + 1,
                              tl.charge_times, instance.battery_max, t0=tl.birth)
    if len(tl.battery) != len(expected) or tl.battery[0] != spec.battery_init:
        out.append(Violation(ViolationKind.DISCONTINUITY, (spec.id,), None, tl.birth))
        return out
    for i, (stored, want) in enumerate(zip(tl.battery, expected)):
        if stored != want:
            out.append(Violation(ViolationKind.DISCONTINUITY, (spec.id,), None, tl.birth + i))
            return out
    for i, level in enumerate(expected):
        if level < 1:
            state = tl.route[i]
            where = state.v if isinstance(state, AtVertex) else normalize_edge(state.u, state.v)
            out.append(Violation(ViolationKind.BATTERY_DEPLETED, (spec.id,), where, tl.birth + i))
            break
    return out


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _check_conflicts(instance: Instance, plan: Plan, ids: list[str]) -> list[Violation]:
    out: list[Violation] = []
    graph = instance.graph
    active: dict[tuple, int] = {}  # contiguous-run dedupe: conflict key -> first time
    for t in range(0, plan.makespan + 1):
        occ_vertex: dict[Vertex, list[str]] = {}
        occ_edge: dict[tuple, list[str]] = {}
        now: set[tuple] = set()
        for aid in ids:
            state = trajectory_occupancy(plan, aid, t)
            if state is None:
                continue
            if isinstance(state, AtVertex):
                for other in occ_vertex.setdefault(state.v, []):
                    key = (ViolationKind.VERTEX_CONFLICT, _pair(aid, other), state.v)
                    now.add(key)
                    active.setdefault(key, t)
                occ_vertex[state.v].append(aid)
            elif isinstance(state, InTransit):
                e = normalize_edge(state.u, state.v)
                for other in occ_edge.setdefault(e, []):
                    key = (ViolationKind.EDGE_OVERLAP_CONFLICT, _pair(aid, other), e)
                    now.add(key)
                    active.setdefault(key, t)
                occ_edge[e].append(aid)
        for key in [k for k in active if k not in now]:
            kind, pair, where = key
            out.append(Violation(kind, pair, where, active.pop(key)))
        if t < plan.makespan:
            positions = {}
            for aid in ids:
                s0 = trajectory_occupancy(plan, aid, t)
                s1 = trajectory_occupancy(plan, aid, t + 1)
                if isinstance(s0, AtVertex) and isinstance(s1, AtVertex) and s0.v != s1.v:
                    positions[aid] = (s0.v, s1.v)
            items = sorted(positions.items())
            for i, (a, (u0, u1)) in enumerate(items):
                for b, (v0, v1) in items[i + 1:]:
                    if u0 == v1 and u1 == v0:
                        out.append(Violation(ViolationKind.SWAP_CONFLICT, _pair(a, b),
                                             normalize_edge(u0, u1), t + 1))
    for (kind, pair, where), t0 in active.items():
        out.append(Violation(kind, pair, where, t0))
    return out
