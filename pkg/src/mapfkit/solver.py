"""Complete, optimal bounded-horizon solving with relaxation switches.

``solve_optimal`` deepens the horizon from a per-agent lower bound to the
instance bound and, at the first satisfiable horizon, returns the plan that
lexicographically minimizes the remaining objectives with deterministic
tie-breaking. Relaxations only remove constraint families (collisions, single
obstacles, battery, horizon); forbidden waits are the one additive constraint
and exist for counterfactual queries.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .model import (AgentSpec, AgentTimeline, AtVertex, DONE, InTransit, Instance, Plan, Vertex,
                    edge_duration, replay_battery)
from .search import INF, AgentTask, run_joint_search
from .validation import validate


@dataclass(frozen=True)
class WaitBan:
    """Forbids agent waits at a vertex during [t_from, t_to); None means unbounded."""

    agent: str
    vertex: Vertex
    t_from: int = 0
    t_to: Optional[int] = None

    def to_json(self) -> dict:
        return {"agent": self.agent, "vertex": self.vertex,
                "t_from": self.t_from, "t_to": self.t_to}


@dataclass(frozen=True)
class Relaxation:
    ignore_agent_collisions: bool = False
    ignored_obstacles: frozenset[Vertex] = frozenset()
    unlimited_battery: bool = False
    extra_horizon: int = 0
    forbidden_waits: frozenset[WaitBan] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ignored_obstacles", frozenset(self.ignored_obstacles))
        object.__setattr__(self, "forbidden_waits", frozenset(self.forbidden_waits))

    @property
    def is_noop(self) -> bool:
        return self == Relaxation()

    def to_json(self) -> dict:
        return {"ignore_agent_collisions": self.ignore_agent_collisions,
                "ignored_obstacles": sorted(self.ignored_obstacles),
                "unlimited_battery": self.unlimited_battery,
                "extra_horizon": self.extra_horizon,
                "forbidden_waits": [b.to_json() for b in
                                    sorted(self.forbidden_waits,
                                           key=lambda b: (b.agent, b.vertex, b.t_from))]}


NO_RELAX = Relaxation()


@dataclass
class SolveStats:
    nodes_expanded: int = 0
    horizon: Optional[int] = None  # last horizon fully decided (or the Sat one)
    wall_time: float = 0.0

    def to_json(self, include_wall_time: bool = False) -> dict:
        body = {"nodes_expanded": self.nodes_expanded, "horizon": self.horizon}
        if include_wall_time:
            body["wall_time"] = round(self.wall_time, 6)
        return body


@dataclass
class SolveResult:
    outcome: str  # "sat" | "unsat" | "timeout"
    plan: Optional[Plan] = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def is_sat(self) -> bool:
        return self.outcome == "sat"


def _check_relax(instance: Instance, relax: Relaxation) -> None:
    extra = relax.ignored_obstacles - instance.graph.obstacles
    if extra:
        raise ValueError(f"ignored_obstacles {sorted(extra)} are not instance obstacles")


def free_task(instance: Instance, spec: AgentSpec) -> AgentTask:
    bits = {w: 1 << i for i, w in enumerate(sorted(spec.waypoints))}
    full = (1 << len(bits)) - 1
    return AgentTask(agent_id=spec.id, goal=spec.goal, start_pos=(0, spec.start),
                     start_mask=bits.get(spec.start, 0), start_battery=spec.battery_init,
                     waypoint_bits=bits, full_mask=full)


def assemble_plan(instance: Instance, result: dict, tasks, start_time: int = 0,
                  relax: Relaxation = NO_RELAX) -> Plan:
    """Turn engine output into a Plan, padding completed agents with Done markers."""
    completions = [c for (_, _, c) in result.values() if c is not None]
    makespan = max(completions, default=start_time)
    timelines = {}
    for task in tasks:
        states, charge_times, completion = result[task.agent_id]
        route = []
        for decoded in states:
            if decoded[0] == "at":
                route.append(AtVertex(decoded[1]))
            else:
                route.append(InTransit(decoded[1], decoded[2], decoded[3]))
        route.extend([DONE] * (makespan - start_time + 1 - len(route)))
        battery = replay_battery(task.start_battery, completion - start_time + 1,
                                 charge_times, instance.battery_max, t0=start_time)
        timelines[task.agent_id] = AgentTimeline(tuple(route), tuple(battery),
                                                 charge_times, birth=start_time)
    return Plan(makespan, timelines)


def solve_decision(instance: Instance, horizon: int, relax: Relaxation = NO_RELAX,
                   deadline: Optional[float] = None) -> SolveResult:
    """Complete decision procedure: Sat with an optimal witness at this horizon, or Unsat."""
    _check_relax(instance, relax)
    if horizon > instance.makespan_bound + relax.extra_horizon:
        raise ValueError(f"horizon {horizon} exceeds bound "
                         f"{instance.makespan_bound} + {relax.extra_horizon}")
    tasks = [free_task(instance, spec) for spec in instance.agents]
    t0 = time.monotonic()
    outcome, result, raw = run_joint_search(instance, tasks, horizon=horizon,
                                            relax=relax, deadline=deadline)
    stats = SolveStats(raw.nodes_expanded, horizon, time.monotonic() - t0)
    if outcome != "sat":
        return SolveResult(outcome, None, stats)
    plan = assemble_plan(instance, result, tasks, relax=relax)
    assert validate(instance, plan, relax).feasible, "engine produced an invalid plan"
    return SolveResult("sat", plan, stats)


def solve_optimal(instance: Instance, relax: Relaxation = NO_RELAX,
                  deadline: Optional[float] = None) -> SolveResult:
    """Iterative deepening from the per-agent lower bound; lexicographically optimal."""
    _check_relax(instance, relax)
    t0 = time.monotonic()
    stats = SolveStats()
    status, lb = _lower_bound_status(instance, relax, deadline)
    top = instance.makespan_bound + relax.extra_horizon
    if status == "timeout":
        stats.wall_time = time.monotonic() - t0
        return SolveResult("timeout", None, stats)
    if lb is None or lb > top:
        stats.wall_time = time.monotonic() - t0
        stats.horizon = top
        return SolveResult("unsat", None, stats)
    for horizon in range(lb, top + 1):
        res = solve_decision(instance, horizon, relax, deadline=deadline)
        stats.nodes_expanded += res.stats.nodes_expanded
        stats.wall_time = time.monotonic() - t0
        if res.outcome == "timeout":
            return SolveResult("timeout", None, stats)
        stats.horizon = horizon
        if res.outcome == "sat":
            res.stats = stats
            return res
    return SolveResult("unsat", None, stats)


def makespan_lower_bound(instance: Instance, relax: Relaxation = NO_RELAX,
                         deadline: Optional[float] = None) -> Optional[int]:
    """Max over agents of the solo optimum; None marks 'no finite bound' (some agent is stuck)."""
    return _lower_bound_status(instance, relax, deadline)[1]


def _lower_bound_status(instance: Instance, relax: Relaxation,
                        deadline: Optional[float]) -> tuple[str, Optional[int]]:
    # Wait bans only remove plans, so the unbanned solo optimum stays a lower
    # bound; stripping them here also keeps the solo solver self-contained.
    relax = replace(relax, forbidden_waits=frozenset())
    best = 0
    for spec in instance.agents:
        res = single_agent_optimal(instance, spec.id, relax, deadline=deadline)
        if res.outcome == "timeout":
            return "timeout", None
        if res.outcome != "sat":
            return "unsat", None
        best = max(best, res.plan.makespan)
    return "ok", best


def single_agent_optimal(instance: Instance, agent_id: str, relax: Relaxation = NO_RELAX,
                         deadline: Optional[float] = None) -> SolveResult:
    """Shortest completion for one agent alone: waypoints, durations and battery respected.

    Dijkstra over (vertex, visited-mask, battery). Plain waits never help a
    solo agent (charging composes with moves), so they are not generated; if a
    wait ban targets this agent the exact joint engine is used instead.
    """
    _check_relax(instance, relax)
    spec = instance.agent(agent_id)
    if any(b.agent == agent_id for b in relax.forbidden_waits):
        sub = instance.replace(agents=[spec])
        return solve_optimal(sub, relax, deadline=deadline)

    graph = instance.graph
    blocked = graph.obstacles - relax.ignored_obstacles
    track = not relax.unlimited_battery
    bits = {w: 1 << i for i, w in enumerate(sorted(spec.waypoints))}
    full = (1 << len(bits)) - 1
    bound = instance.makespan_bound + relax.extra_horizon
    bmax = instance.battery_max

    t0 = time.monotonic()
    if deadline is not None and time.monotonic() > deadline:
        return SolveResult("timeout", None, SolveStats(0, None, 0.0))
    start = (spec.start, bits.get(spec.start, 0), spec.battery_init if track else 0)
    dist = {start: 0}
    parent: dict = {start: None}
    heap = [(0, start)]
    nodes = 0
    goal_state = None
    while heap:
        d, state = heapq.heappop(heap)
        if d > dist.get(state, INF):
            continue
        nodes += 1
        if deadline is not None and nodes % 256 == 0 and time.monotonic() > deadline:
            return SolveResult("timeout", None, SolveStats(nodes, None, time.monotonic() - t0))
        v, mask, bat = state
        if v == spec.goal and mask == full:
            goal_state = state
            break
        if d >= bound:
            continue
        charge_here = track and v in graph.charging
        for u in graph.neighbors(v):
            if u in blocked:
                continue
            dur = edge_duration(graph, v, u)
            if d + dur > bound:
                continue
            nmask = mask | bits.get(u, 0)
            variants = [(False, bat - dur if track else 0)]
            if charge_here:
                variants.append((True, bmax - (dur - 1)))
            for charged, nbat in variants:
                if track and nbat < 1:
                    continue
                nstate = (u, nmask, nbat)
                nd = d + dur
                if nd < dist.get(nstate, INF):
                    dist[nstate] = nd
                    parent[nstate] = (state, charged, dur)
                    heapq.heappush(heap, (nd, nstate))
    stats = SolveStats(nodes, bound, time.monotonic() - t0)
    if goal_state is None:
        return SolveResult("unsat", None, stats)

    completion = dist[goal_state]
    steps = []
    cur = goal_state
    while parent[cur] is not None:
        prev, charged, dur = parent[cur]
        steps.append((prev, cur, charged, dur))
        cur = prev
    steps.reverse()
    route: list = [AtVertex(spec.start)]
    charge_times: set[int] = set()
    t = 0
    for (pv, pm, pb), (nv, nm, nb), charged, dur in steps:
        if charged:
            charge_times.add(t)
        for k in range(1, dur):
            route.append(InTransit(pv, nv, k))
        route.append(AtVertex(nv))
        t += dur
    battery = replay_battery(spec.battery_init, completion + 1, frozenset(charge_times), bmax)
    tl = AgentTimeline(tuple(route), tuple(battery), frozenset(charge_times))
    stats.horizon = completion
    return SolveResult("sat", Plan(completion, {spec.id: tl}), stats)


def deadline_from_timeout(timeout_s: Optional[float]) -> Optional[float]:
    return None if timeout_s is None else time.monotonic() + timeout_s
