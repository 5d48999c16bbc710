"""Plan revision under execution-time events: joins, leaves, obstacle edits.

The reviser keeps every surviving agent on its remaining vertex route and
reschedules only waits (and charge decisions) while planning newcomers from
scratch; replanning everyone from current locations is the configurable
fallback when no small horizon extension rescues the revision.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import EventRejectedError, SchemaError
from .model import (AgentSpec, AgentTimeline, AtVertex, DONE, Done, InTransit, Instance, Plan,
                    Vertex, replay_battery, trajectory_occupancy)
from .search import AgentTask, run_joint_search
from .solver import SolveResult, SolveStats, free_task
from .validation import validate


# ---------------------------------------------------------------------------
# events

@dataclass(frozen=True)
class AgentJoin:
    time: int
    spec: AgentSpec
    kind = "agent_join"


@dataclass(frozen=True)
class AgentLeave:
    time: int
    agent_id: str
    kind = "agent_leave"


@dataclass(frozen=True)
class ObstacleAdd:
    time: int
    vertex: Vertex
    kind = "obstacle_add"


@dataclass(frozen=True)
class ObstacleRemove:
    time: int
    vertex: Vertex
    kind = "obstacle_remove"


@dataclass(frozen=True)
class ObstacleMove:
    time: int
    src: Vertex
    dst: Vertex
    kind = "obstacle_move"


Event = Union[AgentJoin, AgentLeave, ObstacleAdd, ObstacleRemove, ObstacleMove]


@dataclass(frozen=True)
class DynamicPolicy:
    delta_max: int = 3
    fallback_replan: bool = True


@dataclass
class DynamicResult:
    outcome: str  # "sat" | "unsat" | "timeout"
    plan: Optional[Plan] = None
    method: Optional[str] = None  # "revise_augment" | "replan"
    horizon_used: Optional[int] = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def is_sat(self) -> bool:
        return self.outcome == "sat"


@dataclass(frozen=True)
class ExecutionState:
    """A plan under execution: everything up to t_now is committed history."""

    instance: Instance
    plan: Plan
    t_now: int = 0
    stale: bool = False

    def with_plan(self, plan: Plan) -> "ExecutionState":
        return replace(self, plan=plan, stale=False)


def begin_execution(instance: Instance, plan: Plan) -> ExecutionState:
    return ExecutionState(instance, plan)


def occupied_vertices(plan: Plan, t: int) -> dict[Vertex, str]:
    """Vertices held at time t (agents in transit hold no vertex)."""
    out: dict[Vertex, str] = {}
    for aid in plan.agent_ids:
        state = trajectory_occupancy(plan, aid, min(t, plan.makespan))
        if isinstance(state, AtVertex):
            out[state.v] = aid
    return out


# ---------------------------------------------------------------------------
# event application

def apply_event(state: ExecutionState, event: Event) -> ExecutionState:
    """Fold one event into the execution state; the plan becomes stale."""
    if event.time < state.t_now:
        raise EventRejectedError(
            f"event at time {event.time} is in the past (t_now={state.t_now})")
    if state.stale and event.time != state.t_now:
        raise EventRejectedError(
            "pending events at time {} must be resolved before advancing to {}".format(
                state.t_now, event.time))
    inst, plan = state.instance, state.plan
    graph = inst.graph
    occupied = occupied_vertices(plan, event.time)

    if isinstance(event, AgentJoin):
        spec = event.spec
        if spec.id in inst.agent_ids:
            raise EventRejectedError(f"agent id {spec.id!r} already present")
        for label, v in (("start", spec.start), ("goal", spec.goal)):
            if v not in graph.vertices:
                raise EventRejectedError(f"join {label} {v} is not a vertex")
            if v in graph.obstacles:
                raise EventRejectedError(f"join {label} {v} is an obstacle")
        if spec.start in occupied:
            raise EventRejectedError(
                f"join start {spec.start} is occupied by {occupied[spec.start]} "
                f"at time {event.time}")
        goals = {a.goal for a in inst.agents}
        if spec.goal in goals:
            raise EventRejectedError(f"join goal {spec.goal} clashes with an existing goal")
        if not 1 <= spec.battery_init <= inst.battery_max:
            raise EventRejectedError(
                f"join battery {spec.battery_init} outside 1..{inst.battery_max}")
        bad_wp = sorted(w for w in spec.waypoints
                        if w not in graph.vertices or w in graph.obstacles)
        if bad_wp:
            raise EventRejectedError(f"join waypoint {bad_wp[0]} is blocked or missing")
        new_inst = inst.replace(agents=inst.agents + (spec,), check_starts=False)
        new_plan = Plan(plan.makespan, {**plan.timelines})
        return ExecutionState(new_inst, new_plan, event.time, stale=True)

    if isinstance(event, AgentLeave):
        if event.agent_id not in inst.agent_ids:
            raise EventRejectedError(f"no agent {event.agent_id!r} to remove")
        agents = tuple(a for a in inst.agents if a.id != event.agent_id)
        timelines = {aid: tl for aid, tl in plan.timelines.items() if aid != event.agent_id}
        return ExecutionState(inst.replace(agents=agents, check_starts=False),
                              Plan(plan.makespan, timelines), event.time, stale=True)

    if isinstance(event, (ObstacleAdd, ObstacleRemove, ObstacleMove)):
        adds = []
        removes = []
        if isinstance(event, ObstacleAdd):
            adds = [event.vertex]
        elif isinstance(event, ObstacleRemove):
            removes = [event.vertex]
        else:
            removes, adds = [event.src], [event.dst]
        for v in removes:
            if v not in graph.obstacles:
                raise EventRejectedError(f"cell {v} is not an obstacle")
        for v in adds:
            if v not in graph.vertices:
                raise EventRejectedError(f"cell {v} is not a vertex")
            if v in graph.obstacles and v not in removes:
                raise EventRejectedError(f"cell {v} is already an obstacle")
            if v in graph.charging:
                raise EventRejectedError(f"cell {v} is a charging station")
            if v in occupied:
                raise EventRejectedError(f"cell {v} is occupied by {occupied[v]}")
            protected = sorted(v2 for a in inst.agents
                               for v2 in (a.goal, *a.waypoints) if v2 == v)
            if protected:
                raise EventRejectedError(f"cell {v} is a goal or waypoint")
        obstacles = (graph.obstacles - frozenset(removes)) | frozenset(adds)
        from .model import WorldGraph
        new_graph = WorldGraph(graph.vertices, graph.edges, obstacles, graph.charging)
        return ExecutionState(inst.replace(graph=new_graph, check_starts=False),
                              plan, event.time, stale=True)

    raise SchemaError("$.event", f"unknown event {event!r}")


# ---------------------------------------------------------------------------
# revise and augment

def _remaining_route(tl: AgentTimeline, t_now: int) -> tuple[Vertex, ...]:
    """The distinct vertex sequence still ahead of an agent (waits collapsed)."""
    seq: list[Vertex] = []
    start_idx = t_now - tl.birth
    state = tl.route[start_idx]
    if isinstance(state, InTransit):
        seq.append(state.u)
        seq.append(state.v)
    elif isinstance(state, AtVertex):
        seq.append(state.v)
    for s in tl.route[start_idx + 1:]:
        if isinstance(s, Done):
            break
        if isinstance(s, AtVertex) and s.v != seq[-1]:
            seq.append(s.v)
    return tuple(seq)


def _revise_tasks(state: ExecutionState) -> list[AgentTask]:
    inst, plan, t_now = state.instance, state.plan, state.t_now
    tasks = []
    for spec in inst.agents:
        tl = plan.timelines.get(spec.id)
        if tl is None:  # newcomer, planned freely from its join vertex
            tasks.append(free_task(inst, spec))
            continue
        completion = tl.completion
        if completion <= t_now:
            tasks.append(AgentTask(agent_id=spec.id, goal=spec.goal, start_pos=(0, spec.goal),
                                   start_mask=0, start_battery=1, waypoint_bits={}, full_mask=0,
                                   start_parked=True, parked_completion=completion))
            continue
        route = _remaining_route(tl, t_now)
        visited = {s.v for s in tl.route[:t_now - tl.birth + 1] if isinstance(s, AtVertex)}
        missing = spec.waypoints - visited - set(route)
        if missing:
            raise EventRejectedError(
                f"agent {spec.id} can no longer cover waypoints {sorted(missing)} "
                f"on its remaining route")
        cur = tl.route[t_now - tl.birth]
        start_pos = (3, 0, cur.step) if isinstance(cur, InTransit) else (2, 0)
        tasks.append(AgentTask(agent_id=spec.id, goal=spec.goal, start_pos=start_pos,
                               start_mask=0, start_battery=tl.battery[t_now - tl.birth],
                               waypoint_bits={}, full_mask=0, route=route))
    return tasks


def _stitch(state: ExecutionState, suffix: dict, tasks: list[AgentTask]) -> Plan:
    """Committed prefixes + searched suffix -> one full-timeline plan."""
    inst, plan, t_now = state.instance, state.plan, state.t_now
    completions = [c for (_, _, c) in suffix.values() if c is not None]
    makespan = max([t_now] + completions)
    timelines = {}
    for task in tasks:
        aid = task.agent_id
        old = plan.timelines.get(aid)
        states, charges, completion = suffix[aid]
        if old is None:  # joined at t_now
            route = [_to_state(s) for s in states]
            route.extend([DONE] * (makespan - t_now + 1 - len(route)))
            spec = inst.agent(aid)
            battery = replay_battery(spec.battery_init, completion - t_now + 1,
                                     charges, inst.battery_max, t0=t_now)
            timelines[aid] = AgentTimeline(tuple(route), tuple(battery), charges, birth=t_now)
            continue
        if task.start_parked:
            keep = old.route[:old.completion - old.birth + 1]
            route = list(keep) + [DONE] * (makespan - old.birth + 1 - len(keep))
            timelines[aid] = AgentTimeline(tuple(route), old.battery, old.charge_times,
                                           birth=old.birth)
            continue
        prefix = list(old.route[:t_now - old.birth])
        route = prefix + [_to_state(s) for s in states]
        route.extend([DONE] * (makespan - old.birth + 1 - len(route)))
        charge_times = frozenset(t for t in old.charge_times if t < t_now) | charges
        spec = inst.agent(aid)
        battery = replay_battery(spec.battery_init, completion - old.birth + 1,
                                 charge_times, inst.battery_max, t0=old.birth)
        timelines[aid] = AgentTimeline(tuple(route), tuple(battery), charge_times,
                                       birth=old.birth)
    ordered = {spec.id: timelines[spec.id] for spec in inst.agents}
    return Plan(makespan, ordered)


def _to_state(decoded):
    if decoded[0] == "at":
        return AtVertex(decoded[1])
    return InTransit(decoded[1], decoded[2], decoded[3])


def revise_and_augment(state: ExecutionState, horizon: int,
                       deadline: Optional[float] = None) -> SolveResult:
    """Reschedule waits on fixed remaining routes while planning newcomers freely.

    Complete for the restricted space: Unsat means no wait schedule within the
    horizon works for this set of routes.
    """
    if horizon < state.t_now:
        raise ValueError(f"horizon {horizon} precedes t_now {state.t_now}")
    if horizon > state.instance.makespan_bound:
        raise ValueError(f"horizon {horizon} exceeds makespan bound "
                         f"{state.instance.makespan_bound}")
    t0 = time.monotonic()
    tasks = _revise_tasks(state)
    outcome, result, raw = run_joint_search(state.instance, tasks, horizon=horizon,
                                            start_time=state.t_now, deadline=deadline)
    stats = SolveStats(raw.nodes_expanded, horizon, time.monotonic() - t0)
    if outcome != "sat":
        return SolveResult(outcome, None, stats)
    plan = _stitch(state, result, tasks)
    assert validate(state.instance, plan,
                    obstacles_from=state.t_now).feasible, "revised plan failed validation"
    return SolveResult("sat", plan, stats)


def _replan_tasks(state: ExecutionState) -> list[AgentTask]:
    """Free tasks from current locations: the fresh problem replanning solves."""
    inst, plan, t_now = state.instance, state.plan, state.t_now
    tasks = []
    for spec in inst.agents:
        tl = plan.timelines.get(spec.id)
        if tl is None:
            tasks.append(free_task(inst, spec))
            continue
        if tl.completion <= t_now:
            tasks.append(AgentTask(agent_id=spec.id, goal=spec.goal, start_pos=(0, spec.goal),
                                   start_mask=0, start_battery=1, waypoint_bits={}, full_mask=0,
                                   start_parked=True, parked_completion=tl.completion))
            continue
        bits = {w: 1 << i for i, w in enumerate(sorted(spec.waypoints))}
        visited = {s.v for s in tl.route[:t_now - tl.birth + 1] if isinstance(s, AtVertex)}
        mask = 0
        for w in visited & spec.waypoints:
            mask |= bits[w]
        cur = tl.route[t_now - tl.birth]
        pos = (1, cur.u, cur.v, cur.step) if isinstance(cur, InTransit) else (0, cur.v)
        tasks.append(AgentTask(agent_id=spec.id, goal=spec.goal, start_pos=pos,
                               start_mask=mask, start_battery=tl.battery[t_now - tl.birth],
                               waypoint_bits=bits, full_mask=(1 << len(bits)) - 1))
    return tasks


def _replan(state: ExecutionState, deadline: Optional[float]) -> SolveResult:
    """Optimal fresh solve from current locations and goal locations, stitched onto history.

    Same iterative-deepening optimality as a from-scratch solve; run on the
    residual state directly so parked agents and mid-edge positions keep their
    semantics.
    """
    inst, t_now = state.instance, state.t_now
    tasks = _replan_tasks(state)
    agg = SolveStats()
    t0 = time.monotonic()
    for horizon in range(t_now, inst.makespan_bound + 1):
        outcome, result, raw = run_joint_search(inst, tasks, horizon=horizon,
                                                start_time=t_now, deadline=deadline)
        agg.nodes_expanded += raw.nodes_expanded
        agg.horizon = horizon
        agg.wall_time = time.monotonic() - t0
        if outcome == "timeout":
            return SolveResult("timeout", None, agg)
        if outcome == "sat":
            stitched = _stitch(state, result, tasks)
            assert validate(inst, stitched,
                                obstacles_from=t_now).feasible, "replanned plan failed validation"
            return SolveResult("sat", stitched, agg)
    return SolveResult("unsat", None, agg)


def resolve_dynamic(state: ExecutionState, policy: DynamicPolicy = DynamicPolicy(),
                    deadline: Optional[float] = None) -> DynamicResult:
    """Try wait rescheduling at growing horizons, then optionally replan from scratch."""
    base = max(state.plan.makespan, state.t_now)
    top = min(base + policy.delta_max, state.instance.makespan_bound)
    agg = SolveStats()
    for horizon in range(base, top + 1):
        res = revise_and_augment(state, horizon, deadline=deadline)
        agg.nodes_expanded += res.stats.nodes_expanded
        agg.horizon = horizon
        agg.wall_time += res.stats.wall_time
        if res.outcome == "timeout":
            return DynamicResult("timeout", stats=agg)
        if res.outcome == "sat":
            return DynamicResult("sat", res.plan, "revise_augment", horizon, agg)
    if policy.fallback_replan:
        res = _replan(state, deadline)
        agg.nodes_expanded += res.stats.nodes_expanded
        agg.wall_time += res.stats.wall_time
        if res.outcome == "timeout":
            return DynamicResult("timeout", stats=agg)
        if res.outcome == "sat":
            agg.horizon = res.plan.makespan
            return DynamicResult("sat", res.plan, "replan", res.plan.makespan, agg)
    return DynamicResult("unsat", stats=agg)
