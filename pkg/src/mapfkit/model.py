"""World, instance, plan and diagnostic data model plus the pure transition rules.

Time is discrete. At every timestep an agent is at a vertex, in transit on a
multi-timestep edge, or done. An edge of duration d entered from u at time t
occupies the directed edge during t+1..t+d-1 and only reaches v at t+d; the
agent occupies neither endpoint while in transit. Batteries drop by one per
timestep unless a charge action (taken at a charging vertex, effective the
next timestep, composable with a simultaneous move) resets them to maximum.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .errors import NotAdjacentError, SchemaError, UnknownAgentError

Vertex = int
Edge = tuple[Vertex, Vertex]  # normalized with u < v


# ---------------------------------------------------------------------------
# agent states

@dataclass(frozen=True)
class AtVertex:
    v: Vertex


@dataclass(frozen=True)
class InTransit:
    """Mid-traversal of edge u->v, ``step`` timesteps after departure (1 <= step < duration)."""

    u: Vertex
    v: Vertex
    step: int


@dataclass(frozen=True)
class Done:
    """Presentation marker for timesteps after an agent completed."""


DONE = Done()

AgentState = Union[AtVertex, InTransit, Done]


def normalize_edge(u: Vertex, v: Vertex) -> Edge:
    return (u, v) if u <= v else (v, u)


# ---------------------------------------------------------------------------
# world

class WorldGraph:
    """Undirected graph with per-edge traversal durations and vertex attributes.

    Obstacles are vertex attributes, not deletions: the vertex and its edges
    stay in the graph and the validator/solver refuse to enter them.
    """

    __slots__ = ("vertices", "obstacles", "charging", "_durations", "_neighbors")

    def __init__(self, vertices: Iterable[Vertex], edges: Mapping[Edge, int] | Iterable[tuple[Vertex, Vertex, int]],
                 obstacles: Iterable[Vertex] = (), charging: Iterable[Vertex] = ()):
        self.vertices = frozenset(int(v) for v in vertices)
        if isinstance(edges, Mapping):
            items = [(u, v, d) for (u, v), d in edges.items()]
        else:
            items = list(edges)
        durations: dict[Edge, int] = {}
        for u, v, d in items:
            if u not in self.vertices or v not in self.vertices:
                raise SchemaError("$.edges", f"edge ({u},{v}) references a missing vertex")
            if u == v:
                raise SchemaError("$.edges", f"self-loop at vertex {u}")
            if d < 1:
                raise SchemaError("$.edges", f"edge ({u},{v}) has duration {d} < 1")
            durations[normalize_edge(u, v)] = int(d)
        self._durations = durations
        self.obstacles = frozenset(int(v) for v in obstacles)
        self.charging = frozenset(int(v) for v in charging)
        if not self.obstacles <= self.vertices:
            raise SchemaError("$.obstacles", "obstacle ids must be vertices")
        if not self.charging <= self.vertices:
            raise SchemaError("$.charging", "charging ids must be vertices")
        if self.charging & self.obstacles:
            bad = min(self.charging & self.obstacles)
            raise SchemaError("$.charging", f"cell {bad} is both charging and obstacle")
        nbrs: dict[Vertex, list[Vertex]] = {v: [] for v in self.vertices}
        for (u, v) in durations:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self._neighbors = {v: tuple(sorted(ns)) for v, ns in nbrs.items()}

    @property
    def edges(self) -> dict[Edge, int]:
        return dict(self._durations)

    def has_edge(self, u: Vertex, v: Vertex) -> bool:
        return normalize_edge(u, v) in self._durations

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        return self._neighbors.get(v, ())

    def __eq__(self, other):
        return (isinstance(other, WorldGraph)
                and self.vertices == other.vertices
                and self._durations == other._durations
                and self.obstacles == other.obstacles
                and self.charging == other.charging)

    def __repr__(self):
        return (f"WorldGraph({len(self.vertices)} vertices, {len(self._durations)} edges, "
                f"{len(self.obstacles)} obstacles, {len(self.charging)} charging)")


def edge_duration(graph: WorldGraph, u: Vertex, v: Vertex) -> int:
    """Traversal duration of edge {u,v}; symmetric in its endpoints."""
    key = normalize_edge(u, v)
    if key not in graph._durations:
        raise NotAdjacentError(f"vertices {u} and {v} are not adjacent")
    return graph._durations[key]


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid description; cells are numbered 1..rows*cols row-major."""

    rows: int
    cols: int
    obstacles: frozenset[Vertex] = frozenset()
    slow_cells: frozenset[Vertex] = frozenset()
    slow_duration: int = 2
    charging: frozenset[Vertex] = frozenset()

    def __post_init__(self):
        if self.rows < 1:
            raise SchemaError("$.grid.rows", f"rows must be >= 1, got {self.rows}")
        if self.cols < 1:
            raise SchemaError("$.grid.cols", f"cols must be >= 1, got {self.cols}")
        if self.slow_duration < 2:
            raise SchemaError("$.grid.slow_duration", f"slow_duration must be >= 2, got {self.slow_duration}")
        n = self.rows * self.cols
        for name in ("obstacles", "slow_cells", "charging"):
            cells = getattr(self, name)
            object.__setattr__(self, name, frozenset(int(c) for c in cells))
            for c in sorted(getattr(self, name)):
                if not 1 <= c <= n:
                    raise SchemaError(f"$.grid.{name}", f"cell id {c} outside 1..{n}")


def build_graph(spec: GridSpec) -> WorldGraph:
    """4-neighbor grid graph; an edge is slow iff both endpoints are slow cells."""
    n = spec.rows * spec.cols
    vertices = range(1, n + 1)
    edges = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            cell = r * spec.cols + c + 1
            if c + 1 < spec.cols:
                right = cell + 1
                d = spec.slow_duration if cell in spec.slow_cells and right in spec.slow_cells else 1
                edges.append((cell, right, d))
            if r + 1 < spec.rows:
                below = cell + spec.cols
                d = spec.slow_duration if cell in spec.slow_cells and below in spec.slow_cells else 1
                edges.append((cell, below, d))
    return WorldGraph(vertices, edges, obstacles=spec.obstacles, charging=spec.charging)


# ---------------------------------------------------------------------------
# instance

@dataclass(frozen=True)
class AgentSpec:
    id: str
    start: Vertex
    goal: Vertex
    waypoints: frozenset[Vertex] = frozenset()
    battery_init: int = 1

    def __post_init__(self):
        object.__setattr__(self, "waypoints", frozenset(int(w) for w in self.waypoints))


OBJECTIVE_NAMES = ("makespan", "total_time", "charges")


class Instance:
    """A world plus agent specs, battery ceiling, horizon bound and objective order.

    ``check_starts=False`` relaxes the pairwise-distinct and non-obstacle start
    checks for mid-execution snapshots, where recorded starts are historical.
    ``grid`` keeps the grid the graph was built from so files round-trip.
    """

    __slots__ = ("graph", "agents", "battery_max", "makespan_bound", "objectives",
                 "grid", "_by_id")

    def __init__(self, graph: WorldGraph, agents: Iterable[AgentSpec], battery_max: int,
                 makespan_bound: int, objectives: Iterable[str] = OBJECTIVE_NAMES,
                 check_starts: bool = True, grid: Optional[GridSpec] = None):
        self.graph = graph
        self.grid = grid
        self.agents = tuple(agents)
        self.battery_max = int(battery_max)
        self.makespan_bound = int(makespan_bound)
        self.objectives = tuple(objectives)
        if self.battery_max < 1:
            raise SchemaError("$.battery_max", f"battery_max must be >= 1, got {battery_max}")
        if self.makespan_bound < 0:
            raise SchemaError("$.makespan_bound", f"makespan_bound must be >= 0, got {makespan_bound}")
        if not self.objectives or self.objectives[0] != "makespan":
            raise SchemaError("$.objectives", "objectives must be non-empty and start with 'makespan'")
        for name in self.objectives:
            if name not in OBJECTIVE_NAMES:
                raise SchemaError("$.objectives", f"unknown objective {name!r}")
        if len(set(self.objectives)) != len(self.objectives):
            raise SchemaError("$.objectives", "objectives must not repeat")
        seen_ids: set[str] = set()
        starts: set[Vertex] = set()
        goals: set[Vertex] = set()
        for i, a in enumerate(self.agents):
            path = f"$.agents[{i}]"
            if a.id in seen_ids:
                raise SchemaError(path + ".id", f"duplicate agent id {a.id!r}")
            seen_ids.add(a.id)
            for fname, v in (("start", a.start), ("goal", a.goal)):
                if v not in graph.vertices:
                    raise SchemaError(f"{path}.{fname}", f"vertex {v} not in graph")
                if v in graph.obstacles and (fname == "goal" or check_starts):
                    raise SchemaError(f"{path}.{fname}", f"vertex {v} is an obstacle")
            for w in sorted(a.waypoints):
                if w not in graph.vertices:
                    raise SchemaError(path + ".waypoints", f"vertex {w} not in graph")
                if w in graph.obstacles:
                    raise SchemaError(path + ".waypoints", f"vertex {w} is an obstacle")
            if not 1 <= a.battery_init <= self.battery_max:
                raise SchemaError(path + ".battery", f"battery {a.battery_init} outside 1..{self.battery_max}")
            if check_starts and a.start in starts:
                raise SchemaError(path + ".start", f"start {a.start} repeats an earlier agent's start")
            starts.add(a.start)
            if a.goal in goals:
                raise SchemaError(path + ".goal", f"goal {a.goal} repeats an earlier agent's goal")
            goals.add(a.goal)
        self._by_id = {a.id: a for a in self.agents}

    def agent(self, agent_id: str) -> AgentSpec:
        try:
            return self._by_id[agent_id]
        except KeyError:
            raise UnknownAgentError(f"no agent {agent_id!r} in instance") from None

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.agents)

    def replace(self, **kw) -> "Instance":
        args = dict(graph=self.graph, agents=self.agents, battery_max=self.battery_max,
                    makespan_bound=self.makespan_bound, objectives=self.objectives,
                    grid=self.grid)
        check = kw.pop("check_starts", True)
        args.update(kw)
        if "graph" in kw and self.grid is not None and "grid" not in kw:
            g = kw["graph"]
            same_shape = (g.vertices == self.graph.vertices
                          and g.edges == self.graph.edges
                          and g.charging == self.graph.charging)
            args["grid"] = (GridSpec(self.grid.rows, self.grid.cols, g.obstacles,
                                     self.grid.slow_cells, self.grid.slow_duration,
                                     self.grid.charging)
                            if same_shape else None)
        return Instance(check_starts=check, **args)

    def __eq__(self, other):
        return (isinstance(other, Instance)
                and self.graph == other.graph and self.agents == other.agents
                and self.battery_max == other.battery_max
                and self.makespan_bound == other.makespan_bound
                and self.objectives == other.objectives)

    def __repr__(self):
        return f"Instance({len(self.agents)} agents, bound={self.makespan_bound})"


# ---------------------------------------------------------------------------
# battery semantics

def battery_step(level: int, charging: bool, battery_max: int) -> int:
    """Next battery level: the maximum after a charge action, otherwise level - 1.

    May return 0; callers enforce the >= 1 floor through completion.
    """
    if not 1 <= level <= battery_max:
        raise ValueError(f"battery level {level} outside 1..{battery_max}")
    return battery_max if charging else level - 1


def replay_battery(init: int, length: int, charge_times: frozenset[int], battery_max: int,
                   t0: int = 0) -> list[int]:
    """Battery trace of ``length`` values starting at time ``t0`` with level ``init``.

    Purely arithmetic; values below 1 are carried through so callers can
    locate the first depletion.
    """
    out = [init]
    level = init
    for t in range(t0, t0 + length - 1):
        level = battery_max if t in charge_times else level - 1
        out.append(level)
    return out


# ---------------------------------------------------------------------------
# plans

@dataclass(frozen=True)
class AgentTimeline:
    """One agent's row of a plan: states for t = birth..makespan plus battery bookkeeping.

    ``route`` may end in a run of Done markers; the last non-Done index is the
    agent's completion time. ``battery`` covers birth..completion inclusive.
    """

    route: tuple[AgentState, ...]
    battery: tuple[int, ...]
    charge_times: frozenset[int] = frozenset()
    birth: int = 0

    @property
    def completion(self) -> int:
        t = self.birth + len(self.route) - 1
        for state in reversed(self.route):
            if not isinstance(state, Done):
                return t
            t -= 1
        return self.birth - 1  # all Done; malformed, flagged by the validator

    @property
    def anchor_vertex(self) -> Optional[Vertex]:
        """Vertex occupied during the Done tail (the final at-vertex position)."""
        for state in reversed(self.route):
            if isinstance(state, AtVertex):
                return state.v
            if isinstance(state, InTransit):
                return None
        return None


class Plan:
    """Per-agent timed trajectories over a shared horizon.

    ``makespan`` is the plan's stored horizon: every timeline runs from its
    birth to this timestep.
    """

    __slots__ = ("makespan", "timelines")

    def __init__(self, makespan: int, timelines: Mapping[str, AgentTimeline]):
        self.makespan = int(makespan)
        self.timelines = dict(timelines)

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(self.timelines)

    def timeline(self, agent_id: str) -> AgentTimeline:
        try:
            return self.timelines[agent_id]
        except KeyError:
            raise UnknownAgentError(f"no agent {agent_id!r} in plan") from None

    def completion(self, agent_id: str) -> int:
        return self.timeline(agent_id).completion

    def charges(self) -> int:
        return sum(len(tl.charge_times) for tl in self.timelines.values())

    def total_time(self) -> int:
        return sum(tl.completion for tl in self.timelines.values())

    def objective_vector(self, objectives: Iterable[str]) -> tuple[int, ...]:
        values = {"makespan": self.makespan, "total_time": self.total_time(), "charges": self.charges()}
        return tuple(values[name] for name in objectives)

    def __eq__(self, other):
        return (isinstance(other, Plan) and self.makespan == other.makespan
                and self.timelines == other.timelines)

    def __repr__(self):
        return f"Plan(makespan={self.makespan}, agents={list(self.timelines)})"


def trajectory_occupancy(plan: Plan, agent_id: str, t: int) -> Optional[AgentState]:
    """State of ``agent_id`` at time ``t`` for conflict-checking purposes.

    Done entries resolve to staying at the final vertex (completed agents keep
    occupying their goal). Before a joined agent's birth the agent does not
    exist and None is returned.
    """
    tl = plan.timeline(agent_id)
    if t < tl.birth:
        return None
    if t > plan.makespan:
        raise ValueError(f"time {t} beyond plan makespan {plan.makespan}")
    state = tl.route[t - tl.birth]
    if isinstance(state, Done):
        anchor = tl.anchor_vertex
        return AtVertex(anchor) if anchor is not None else None
    return state


# ---------------------------------------------------------------------------
# diagnostics

class ViolationKind(Enum):
    VERTEX_CONFLICT = "vertex_conflict"
    SWAP_CONFLICT = "swap_conflict"
    EDGE_OVERLAP_CONFLICT = "edge_overlap_conflict"
    OBSTACLE_COLLISION = "obstacle_collision"
    BATTERY_DEPLETED = "battery_depleted"
    WAYPOINT_MISSED = "waypoint_missed"
    GOAL_MISSED = "goal_missed"
    DISCONTINUITY = "discontinuity"
    HORIZON_EXCEEDED = "horizon_exceeded"


_KIND_ORDER = {kind: i for i, kind in enumerate(ViolationKind)}
_NO_TIME = 10 ** 9


@dataclass(frozen=True)
class Violation:
    """A typed diagnostic; the sort key (time, kind, agents, location) is total."""

    kind: ViolationKind
    agents: tuple[str, ...]
    where: Union[Vertex, Edge, None] = None
    time: Optional[int] = None

    def sort_key(self):
        if self.where is None:
            wkey = (2, 0, 0)
        elif isinstance(self.where, tuple):
            wkey = (1, self.where[0], self.where[1])
        else:
            wkey = (0, self.where, 0)
        tkey = self.time if self.time is not None else _NO_TIME
        return (tkey, _KIND_ORDER[self.kind], self.agents, wkey)

    def to_json(self) -> dict:
        where: object
        if isinstance(self.where, tuple):
            where = list(self.where)
        else:
            where = self.where
        return {"kind": self.kind.value, "agents": list(self.agents),
                "where": where, "time": self.time}

    def describe(self) -> str:
        names = " and ".join(f"Robot {a}" for a in self.agents)
        at = f" at time step {self.time}" if self.time is not None else ""
        if isinstance(self.where, tuple):
            place = f"edge {self.where[0]}-{self.where[1]}"
        else:
            place = f"Cell {self.where}" if self.where is not None else "?"
        if self.kind is ViolationKind.VERTEX_CONFLICT:
            return f"{names} collide at {place}{at}"
        if self.kind is ViolationKind.SWAP_CONFLICT:
            return f"{names} swap across {place}{at}"
        if self.kind is ViolationKind.EDGE_OVERLAP_CONFLICT:
            return f"{names} overlap on {place}{at}"
        if self.kind is ViolationKind.OBSTACLE_COLLISION:
            return f"{names} collides with the obstacle at {place}{at}"
        if self.kind is ViolationKind.BATTERY_DEPLETED:
            return f"{names} runs out of battery at {place}{at}"
        if self.kind is ViolationKind.WAYPOINT_MISSED:
            return f"{names} never visits waypoint {place}"
        if self.kind is ViolationKind.GOAL_MISSED:
            return f"{names} never settles at goal {place}"
        if self.kind is ViolationKind.HORIZON_EXCEEDED:
            return f"{names} exceeds the makespan bound{at}"
        return f"{names} has a discontinuous trajectory at {place}{at}"
