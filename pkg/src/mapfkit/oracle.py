"""Brute-force reference solver: layered dynamic programming over joint states.

Used only by tests and derived-value generation as the independent second
route next to the best-first engine. Same model semantics, deliberately
different machinery: forward enumeration layer by layer over the full joint
state space, no heuristics, no tie-breaking guarantees beyond determinism.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .errors import CapExceededError
from .model import (AgentTimeline, AtVertex, DONE, InTransit, Instance, Plan,
                    edge_duration, normalize_edge, replay_battery)
from .solver import NO_RELAX, Relaxation, SolveResult, SolveStats

DEFAULT_STATE_CAP = 40_000_000
_BIG = 10 ** 9


@dataclass
class OracleStats(SolveStats):
    layers: int = 0
    states_seen: int = 0

    def to_json(self, include_wall_time: bool = False) -> dict:
        body = super().to_json(include_wall_time)
        body.update({"layers": self.layers, "states_seen": self.states_seen})
        return body


def brute_force_optimal(instance: Instance, relax: Relaxation = NO_RELAX,
                        state_cap: int = DEFAULT_STATE_CAP,
                        deadline: Optional[float] = None) -> SolveResult:
    """Exhaustive optimal solve for small instances; CapExceededError guards blowups."""
    graph = instance.graph
    blocked = graph.obstacles - frozenset(relax.ignored_obstacles)
    track = not relax.unlimited_battery
    top = instance.makespan_bound + relax.extra_horizon
    objectives = instance.objectives[1:]

    per_agent = []
    for spec in instance.agents:
        wps = tuple(sorted(spec.waypoints))
        bits = {w: 1 << i for i, w in enumerate(wps)}
        bans = tuple((b.vertex, b.t_from, b.t_to if b.t_to is not None else _BIG)
                     for b in sorted(relax.forbidden_waits,
                                     key=lambda b: (b.vertex, b.t_from))
                     if b.agent == spec.id)
        per_agent.append((spec, bits, (1 << len(wps)) - 1, bans))

    n_vert = len(graph.vertices - blocked)
    n_transit = sum(2 * (d - 1) for d in graph.edges.values())
    per_states = (n_vert + n_transit) * (instance.battery_max if track else 1)
    total = (top + 1)
    for spec, bits, full, _ in per_agent:
        total *= max(per_states * (full + 1), 1)
    if total > state_cap:
        raise CapExceededError(
            f"joint state-space estimate {total} exceeds cap {state_cap}")

    # agent state: ("v", x, mask, bat, parked) | ("e", u, v, k, mask, bat)
    def successors(idx: int, st: tuple, t: int):
        spec, bits, full, bans = per_agent[idx]
        out = []
        if st[0] == "v" and st[4]:  # parked
            return [(st, 0, None)]
        if st[0] == "e":
            _, u, v, k, mask, bat = st
            nb = bat - 1 if track else 0
            if not track or nb >= 1:
                d = edge_duration(graph, u, v)
                if k + 1 < d:
                    out.append((("e", u, v, k + 1, mask, nb), 0, None))
                else:
                    out.append((("v", v, mask | bits.get(v, 0), nb, False), 0, None))
            return out
        _, x, mask, bat, _ = st
        charge_ok = track and x in graph.charging
        wait_banned = any(bv == x and lo <= t < hi for (bv, lo, hi) in bans)
        if not wait_banned:
            nb = bat - 1 if track else 0
            if not track or nb >= 1:
                out.append((("v", x, mask, nb, False), 0, None))
            if charge_ok:
                out.append((("v", x, mask, instance.battery_max, False), 1, None))
        if x == spec.goal and mask == full:
            out.append((("v", x, mask, bat, True), 0, t))
        for u in sorted(graph.neighbors(x)):
            if u in blocked:
                continue
            d = edge_duration(graph, x, u)
            variants = [(bat - d if track else 0, 0)] if d == 1 else [(bat - 1 if track else 0, 0)]
            if charge_ok:
                variants.append((instance.battery_max - (d - 1), 1) if d == 1
                                else (instance.battery_max, 1))
            for nb, ch in variants:
                if track and nb < 1:
                    continue
                if d == 1:
                    out.append((("v", u, mask | bits.get(u, 0), nb, False), ch, None))
                else:
                    out.append((("e", x, u, 1, mask, nb), ch, None))
        return out

    def occupancy(st):
        if st[0] == "v":
            return ("v", st[1])
        return ("e", normalize_edge(st[1], st[2]))

    def vertex_of(st):
        return st[1] if st[0] == "v" else None

    def completable(idx, st):
        spec, bits, full, _ = per_agent[idx]
        return st[0] == "v" and (st[4] or (st[1] == spec.goal and st[2] == full))

    init = tuple(("v", spec.start, bits.get(spec.start, 0),
                  spec.battery_init if track else 0, False)
                 for spec, bits, _, _ in per_agent)
    if not relax.ignore_agent_collisions:
        starts = [spec.start for spec, _, _, _ in per_agent]
        if len(set(starts)) != len(starts):  # co-located from the start
            return SolveResult("unsat", None, OracleStats())
    layer: dict = {init: (0, 0)}
    parents: dict = {(0, init): None}
    stats = OracleStats()
    t0 = time.monotonic()

    def terminal_vector_and_state(states_at_t, t):
        best = None
        for joint, (tt, ch) in states_at_t.items():
            if all(completable(i, st) for i, st in enumerate(joint)):
                extra = sum(t for st in joint if not st[4])
                vals = {"total_time": tt + extra, "charges": ch}
                vec = tuple(vals[name] for name in objectives)
                if best is None or vec < best[0]:
                    best = (vec, joint)
        return best

    for t in range(0, top + 1):
        stats.layers = t
        stats.states_seen += len(layer)
        if deadline is not None and time.monotonic() > deadline:
            stats.wall_time = time.monotonic() - t0
            return SolveResult("timeout", None, stats)
        best = terminal_vector_and_state(layer, t)
        if best is not None:
            plan = _rebuild(instance, per_agent, parents, t, best[1], track)
            stats.horizon = t
            stats.wall_time = time.monotonic() - t0
            return SolveResult("sat", plan, stats)
        if t == top:
            break
        nxt: dict = {}
        succ_cache: dict = {}
        for joint, (tt, ch) in layer.items():
            lists = []
            dead = False
            for i, st in enumerate(joint):
                ck = (i, st) if not per_agent[i][3] else (i, st, t)
                opts = succ_cache.get(ck)
                if opts is None:
                    opts = successors(i, st, t)
                    succ_cache[ck] = opts
                if not opts:
                    dead = True
                    break
                lists.append(opts)
            if dead:
                continue
            for combo in _product_conflict_free(lists, occupancy, vertex_of, joint,
                                                relax.ignore_agent_collisions):
                njoint = tuple(st for st, _, _ in combo)
                ntt = tt + sum(pt for _, _, pt in combo if pt is not None)
                nch = ch + sum(c for _, c, _ in combo)
                vals = {"total_time": ntt, "charges": nch}
                cost = tuple(vals[name] for name in objectives)
                old = nxt.get(njoint)
                if old is None or cost < tuple(
                        {"total_time": old[0], "charges": old[1]}[name] for name in objectives):
                    nxt[njoint] = (ntt, nch)
                    parents[(t + 1, njoint)] = ((t, joint), combo)
        layer = nxt
        if not layer:
            break

    stats.wall_time = time.monotonic() - t0
    stats.horizon = top
    return SolveResult("unsat", None, stats)


def _product_conflict_free(lists, occupancy, vertex_of, joint, ignore_collisions):
    n = len(lists)
    chosen = [None] * n

    def rec(i):
        if i == n:
            yield tuple(chosen)
            return
        for opt in lists[i]:
            st = opt[0]
            if not ignore_collisions:
                occ = occupancy(st)
                v0, v1 = vertex_of(joint[i]), vertex_of(st)
                bad = False
                for j in range(i):
                    pst = chosen[j][0]
                    if occupancy(pst) == occ:
                        bad = True
                        break
                    p0, p1 = vertex_of(joint[j]), vertex_of(pst)
                    if (None not in (v0, v1, p0, p1) and v0 != v1
                            and v0 == p1 and v1 == p0):
                        bad = True
                        break
                if bad:
                    continue
            chosen[i] = opt
            yield from rec(i + 1)
        chosen[i] = None

    yield from rec(0)


def _rebuild(instance, per_agent, parents, t_final, terminal, track):
    chain = []
    key = (t_final, terminal)
    while parents.get(key) is not None:
        prev, combo = parents[key]
        chain.append(combo)
        key = prev
    chain.reverse()

    timelines = {}
    completions = {}
    for i, (spec, bits, full, _) in enumerate(per_agent):
        states = [("v", spec.start)]
        charges = set()
        completion = None
        parked = False
        cur_t = 0
        for combo in chain:
            st, ch, park_t = combo[i]
            cur_t += 1
            if parked:
                continue
            if park_t is not None:
                completion = park_t
                parked = True
                continue
            if st[0] == "v":
                states.append(("v", st[1]))
            else:
                states.append(("e", st[1], st[2], st[3]))
            if ch:
                charges.add(cur_t - 1)
        if completion is None:
            completion = t_final
        completions[spec.id] = (states, frozenset(charges), completion)

    makespan = max((c for _, _, c in completions.values()), default=0)
    for spec, bits, full, _ in per_agent:
        states, charges, completion = completions[spec.id]
        route = [AtVertex(s[1]) if s[0] == "v" else InTransit(s[1], s[2], s[3]) for s in states]
        route.extend([DONE] * (makespan + 1 - len(route)))
        battery = replay_battery(spec.battery_init, completion + 1, charges,
                                 instance.battery_max)
        timelines[spec.id] = AgentTimeline(tuple(route), tuple(battery), charges)
    return Plan(makespan, timelines)
