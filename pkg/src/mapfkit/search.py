"""Bounded-horizon joint best-first search shared by the solver and the plan reviser.

One engine covers both planning modes: agents either roam freely toward their
goal through their waypoints, or follow a fixed remaining vertex route with
only wait placement (and charging) left open. The search is exhaustive within
the horizon, so an empty frontier is a completeness proof for Unsat.

Priorities are (objective vector, action sequence): the first terminal popped
is the lexicographic optimum, and among cost ties the plan whose action
sequence is smallest under move-to-smaller-vertex < wait < charge, agents in
instance order, time-major. This makes every output reproducible byte for
byte.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Optional

from .model import Instance, Vertex, edge_duration, normalize_edge

INF = 10 ** 9

# position encodings inside the joint state
#   free agents:  (0, v)          at vertex v
#                 (1, u, v, k)    in transit u->v, step k
#   route agents: (2, j)          at route index j
#                 (3, j, k)       in transit route[j]->route[j+1], step k


@dataclass(frozen=True)
class AgentTask:
    """Per-agent search mode and starting condition."""

    agent_id: str
    goal: Vertex
    start_pos: tuple
    start_mask: int
    start_battery: int
    waypoint_bits: dict  # vertex -> bit, empty for route agents
    full_mask: int
    route: Optional[tuple[Vertex, ...]] = None  # fixed remaining vertex sequence
    start_parked: bool = False
    parked_completion: Optional[int] = None  # completion of agents done before the search starts


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    pushed: int = 0


def waypoint_distance_table(graph, goal: Vertex, waypoints: tuple[Vertex, ...],
                            blocked: frozenset[Vertex]) -> dict:
    """Exact min traversal time from (vertex, visited-mask) to goal-with-all-waypoints.

    Battery-free, other-agent-free: admissible and consistent for the joint
    search, exact for horizon pruning. Layered Dijkstra over masks in
    decreasing popcount order; arriving at a waypoint sets its bit.
    """
    bits = {w: 1 << i for i, w in enumerate(waypoints)}
    full = (1 << len(waypoints)) - 1
    masks = sorted(range(full + 1), key=lambda m: (-bin(m).count("1"), m))
    table: dict[tuple[Vertex, int], int] = {}
    for mask in masks:
        dist = {}
        heap = []
        if mask == full and goal not in blocked:
            dist[goal] = 0
            heap.append((0, goal))
        for v in graph.vertices:
            if v in blocked:
                continue
            best = INF
            for u in graph.neighbors(v):
                if u in blocked:
                    continue
                bit = bits.get(u, 0)
                if bit and not mask & bit:
                    up = table.get((u, mask | bit), INF)
                    if up < INF:
                        best = min(best, edge_duration(graph, v, u) + up)
            if best < INF and best < dist.get(v, INF):
                dist[v] = best
                heap.append((best, v))
        heapq.heapify(heap)
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist.get(v, INF):
                continue
            for u in graph.neighbors(v):
                if u in blocked:
                    continue
                bit = bits.get(u, 0)
                if bit and not mask & bit:
                    continue  # cross-mask arcs were seeded above
                nd = d + edge_duration(graph, v, u)
                if nd < dist.get(u, INF):
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        for v, d in dist.items():
            table[(v, mask)] = d
    return table


class _AgentCtx:
    """Precomputed per-agent data the inner loops need."""

    __slots__ = ("task", "graph", "charging", "blocked", "battery_max", "track_battery",
                 "table", "rem", "wait_bans")

    def __init__(self, task: AgentTask, instance: Instance, blocked, track_battery, wait_bans):
        self.task = task
        self.graph = instance.graph
        self.charging = instance.graph.charging
        self.blocked = blocked
        self.battery_max = instance.battery_max
        self.track_battery = track_battery
        self.wait_bans = wait_bans  # tuple of (vertex, t_from, t_to)
        if task.route is None:
            wps = tuple(sorted(task.waypoint_bits))
            self.table = waypoint_distance_table(self.graph, task.goal, wps, blocked)
            self.rem = None
        else:
            self.table = None
            rem = [0] * len(task.route)
            for j in range(len(task.route) - 2, -1, -1):
                rem[j] = rem[j + 1] + edge_duration(self.graph, task.route[j], task.route[j + 1])
            self.rem = tuple(rem)

    def heuristic(self, pos, mask) -> int:
        if pos[0] == 0:
            return self.table.get((pos[1], mask), INF)
        if pos[0] == 1:
            _, u, v, k = pos
            d = edge_duration(self.graph, u, v)
            bit = self.task.waypoint_bits.get(v, 0)
            return (d - k) + self.table.get((v, mask | bit), INF)
        if pos[0] == 2:
            return self.rem[pos[1]]
        _, j, k = pos
        d = edge_duration(self.graph, self.task.route[j], self.task.route[j + 1])
        return (d - k) + self.rem[j + 1]

    def vertex_now(self, pos) -> Optional[Vertex]:
        if pos[0] == 0:
            return pos[1]
        if pos[0] == 2:
            return self.task.route[pos[1]]
        return None

    def occupancy(self, pos):
        """("v", vertex) or ("e", edge) occupancy of an encoded position."""
        if pos[0] == 0:
            return ("v", pos[1])
        if pos[0] == 2:
            return ("v", self.task.route[pos[1]])
        if pos[0] == 1:
            return ("e", normalize_edge(pos[1], pos[2]))
        j = pos[1]
        return ("e", normalize_edge(self.task.route[j], self.task.route[j + 1]))

    def completable(self, pos, mask) -> bool:
        if self.task.route is not None:
            return pos[0] == 2 and pos[1] == len(self.task.route) - 1
        return pos[0] == 0 and pos[1] == self.task.goal and mask == self.task.full_mask

    def wait_forbidden(self, v: Vertex, t: int) -> bool:
        for (bv, t0, t1) in self.wait_bans:
            if bv == v and t0 <= t < t1:
                return True
        return False

    def options(self, state, t):
        """Successor choices at step t -> t+1, sorted by tie-break key.

        Yields (key, new_state, charged, park, occ_next, v_now, v_next) where
        key orders plain moves < plain wait < charging variants.
        """
        pos, mask, bat, parked = state
        goalv = self.task.goal
        if parked:
            yield ((0, 1, goalv), state, False, False, ("v", goalv), goalv, goalv)
            return
        out = []
        track = self.track_battery
        if pos[0] in (1, 3):  # forced transit continuation
            nb = bat - 1 if track else bat
            if not track or nb >= 1:
                if pos[0] == 1:
                    _, u, v, k = pos
                    d = edge_duration(self.graph, u, v)
                    if k + 1 < d:
                        npos = (1, u, v, k + 1)
                        occ = ("e", normalize_edge(u, v))
                        nxt = None
                    else:
                        bit = self.task.waypoint_bits.get(v, 0)
                        mask |= bit
                        npos = (0, v)
                        occ = ("v", v)
                        nxt = v
                    out.append(((0, 0, v), (npos, mask, nb, False), False, False, occ, None, nxt))
                else:
                    _, j, k = pos
                    u, v = self.task.route[j], self.task.route[j + 1]
                    d = edge_duration(self.graph, u, v)
                    if k + 1 < d:
                        npos = (3, j, k + 1)
                        occ = ("e", normalize_edge(u, v))
                        nxt = None
                    else:
                        npos = (2, j + 1)
                        occ = ("v", v)
                        nxt = v
                    out.append(((0, 0, v), (npos, mask, nb, False), False, False, occ, None, nxt))
            yield from out
            return

        v_now = self.vertex_now(pos)
        can_charge = track and v_now in self.charging
        dec = bat - 1 if track else bat
        wait_ok = not self.wait_forbidden(v_now, t)

        def move_targets():
            if self.task.route is not None:
                j = pos[1]
                if j + 1 < len(self.task.route):
                    u = self.task.route[j + 1]
                    if u not in self.blocked:  # an obstacle may have landed on the route
                        yield u
            else:
                for u in self.graph.neighbors(v_now):
                    if u not in self.blocked:
                        yield u

        for u in move_targets():
            d = edge_duration(self.graph, v_now, u)
            if self.task.route is not None:
                npos = (2, pos[1] + 1) if d == 1 else (3, pos[1], 1)
                nmask = mask
            elif d == 1:
                npos = (0, u)
                nmask = mask | self.task.waypoint_bits.get(u, 0)
            else:
                npos = (1, v_now, u, 1)
                nmask = mask
            occ = ("v", u) if d == 1 else ("e", normalize_edge(v_now, u))
            nxt = u if d == 1 else None
            variants = ((False, dec), (True, self.battery_max)) if can_charge else ((False, dec),)
            for charged, nb in variants:
                if track and nb < 1:
                    continue
                out.append((((1 if charged else 0), 0, u),
                            (npos, nmask, nb, False), charged, False, occ, v_now, nxt))
        if wait_ok:
            if not self.track_battery or dec >= 1:
                out.append(((0, 1, v_now), (pos, mask, dec, False), False, False,
                            ("v", v_now), v_now, v_now))
            if can_charge:
                out.append(((1, 1, v_now), (pos, mask, self.battery_max, False), True, False,
                            ("v", v_now), v_now, v_now))
        if self.completable(pos, mask):
            out.append(((0, 1, v_now), (pos, mask, bat, True), False, True,
                        ("v", v_now), v_now, v_now))
        out.sort(key=lambda o: o[0])
        yield from out


def run_joint_search(instance: Instance, tasks: list[AgentTask], *, horizon: int,
                     start_time: int = 0, relax=None, deadline: Optional[float] = None):
    """Search for a lexicographically optimal joint plan completing by ``horizon``.

    Returns (outcome, result, stats): outcome "sat" with result a per-agent dict
    of (states, charge_times, completion); "unsat" after exhausting the space;
    "timeout" if the deadline trips.
    """
    stats = SearchStats()
    if deadline is not None and time.monotonic() > deadline:
        return "timeout", None, stats
    ignore_collisions = bool(relax and relax.ignore_agent_collisions)
    ignored_obs = frozenset(relax.ignored_obstacles) if relax else frozenset()
    track_battery = not (relax and relax.unlimited_battery)
    blocked = instance.graph.obstacles - ignored_obs
    bans_by_agent = {}
    if relax:
        for ban in sorted(relax.forbidden_waits, key=lambda b: (b.agent, b.vertex, b.t_from, b.t_to)):
            hi = ban.t_to if ban.t_to is not None else INF
            bans_by_agent.setdefault(ban.agent, []).append((ban.vertex, ban.t_from, hi))

    ctxs = [_AgentCtx(task, instance, blocked, track_battery,
                      tuple(bans_by_agent.get(task.agent_id, ())))
            for task in tasks]
    objectives = instance.objectives[1:]

    init_joint = tuple((t.start_pos, t.start_mask,
                        t.start_battery if track_battery else 0, t.start_parked)
                       for t in tasks)
    for ctx, st in zip(ctxs, init_joint):
        if not st[3] and ctx.heuristic(st[0], st[1]) >= INF:
            return "unsat", None, stats
        if not st[3] and start_time + ctx.heuristic(st[0], st[1]) > horizon:
            return "unsat", None, stats
    if not ignore_collisions:
        seen = set()
        for ctx, st in zip(ctxs, init_joint):
            occ = ("v", ctx.task.goal) if st[3] else ctx.occupancy(st[0])
            if occ in seen:  # co-located from the start: no plan can exist
                return "unsat", None, stats
            seen.add(occ)

    def fvec(t, joint, g_tt, g_ch):
        f_tt = g_tt
        for ctx, st in zip(ctxs, joint):
            if not st[3]:
                f_tt += t + ctx.heuristic(st[0], st[1])
        vals = {"total_time": f_tt, "charges": g_ch}
        return tuple(vals[name] for name in objectives)

    settled: dict = {}
    dom: dict = {}
    heap = []
    counter = 0
    g0 = (0, 0)
    heap.append((fvec(start_time, init_joint, 0, 0), (), counter, start_time, init_joint, g0, None, None))
    pops = 0

    while heap:
        prio, seq, _, t, joint, gvec, parent, action = heapq.heappop(heap)
        pops += 1
        if deadline is not None and pops % 128 == 0 and time.monotonic() > deadline:
            return "timeout", None, stats
        key = (t, joint)
        if key in settled:
            continue
        settled[key] = (parent, action)
        stats.nodes_expanded += 1

        if all(st[3] or ctx.completable(st[0], st[1]) for ctx, st in zip(ctxs, joint)):
            return "sat", _reconstruct(settled, key, tasks, ctxs, t), stats

        g_tt, g_ch = gvec
        dkey = (t, tuple((st[0], st[1], st[3]) for st in joint))
        bats = tuple(st[2] for st in joint)
        cost = tuple({"total_time": g_tt, "charges": g_ch}[n] for n in objectives)
        entries = dom.setdefault(dkey, [])
        if any(all(eb >= cb for eb, cb in zip(e_bat, bats)) and e_cost < cost
               for e_bat, e_cost in entries):
            continue
        entries.append((bats, cost))

        if t >= horizon:
            continue

        option_lists = []
        feasible = True
        for ctx, st in zip(ctxs, joint):
            opts = []
            for opt in ctx.options(st, t):
                npos, nmask, _, nparked = opt[1]
                if not nparked and t + 1 + ctx.heuristic(npos, nmask) > horizon:
                    continue
                opts.append(opt)
            if not opts:
                feasible = False
                break
            option_lists.append(opts)
        if not feasible:
            continue

        for composite in _compose(option_lists, ignore_collisions):
            njoint = tuple(opt[1] for opt in composite)
            n_tt = g_tt + sum(t for opt in composite if opt[3])
            n_ch = g_ch + sum(1 for opt in composite if opt[2])
            nseq = seq + (tuple(opt[0] for opt in composite),)
            counter += 1
            stats.pushed += 1
            heapq.heappush(heap, (fvec(t + 1, njoint, n_tt, n_ch), nseq, counter,
                                  t + 1, njoint, (n_tt, n_ch), key,
                                  tuple((opt[1], opt[2], opt[3]) for opt in composite)))
    return "unsat", None, stats


def _compose(option_lists, ignore_collisions):
    """Cartesian product of per-agent options with incremental conflict pruning."""
    n = len(option_lists)
    chosen = [None] * n

    def rec(i):
        if i == n:
            yield tuple(chosen)
            return
        for opt in option_lists[i]:
            if not ignore_collisions:
                _, _, _, _, occ, v_now, v_next = opt
                clash = False
                for prev in chosen[:i]:
                    p_occ, p_now, p_next = prev[4], prev[5], prev[6]
                    if occ == p_occ:
                        clash = True
                        break
                    if (v_now is not None and v_next is not None and p_now is not None
                            and p_next is not None and v_now != v_next
                            and v_now == p_next and v_next == p_now):
                        clash = True
                        break
                if clash:
                    continue
            chosen[i] = opt
            yield from rec(i + 1)
        chosen[i] = None

    yield from rec(0)


def _reconstruct(settled, terminal_key, tasks, ctxs, t_final):
    """Walk parent pointers into per-agent (states, charge_times, completion)."""
    steps = []
    key = terminal_key
    while True:
        parent, action = settled[key]
        if parent is None:
            start_key = key
            break
        steps.append((key[0], action))
        key = parent
    steps.reverse()
    start_t, start_joint = start_key

    result = {}
    for i, (task, ctx) in enumerate(zip(tasks, ctxs)):
        if task.start_parked:
            result[task.agent_id] = ([], frozenset(), task.parked_completion)
            continue
        pos, mask, bat, parked = start_joint[i]
        states = [pos]
        charges = set()
        completion = None
        cur_parked = False
        for (tt, action) in steps:
            nstate, charged, parked_now = action[i]
            if cur_parked:
                continue
            if parked_now:
                completion = tt - 1
                cur_parked = True
                continue
            states.append(nstate[0])
            if charged:
                charges.add(tt - 1)
        if completion is None:
            completion = t_final
        decoded = [_decode(ctx, p) for p in states]
        result[task.agent_id] = (decoded, frozenset(charges), completion)
    return result


def _decode(ctx, pos):
    """Encoded position -> ("at", v) or ("tr", u, v, k)."""
    if pos[0] == 0:
        return ("at", pos[1])
    if pos[0] == 1:
        return ("tr", pos[1], pos[2], pos[3])
    if pos[0] == 2:
        return ("at", ctx.task.route[pos[1]])
    j = pos[1]
    return ("tr", ctx.task.route[j], ctx.task.route[j + 1], pos[2])
