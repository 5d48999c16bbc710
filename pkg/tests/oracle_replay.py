"""Independent plan acceptor used to cross-check the validator.

Replays a plan state by state against first-principles stepping rules,
sharing no code with mapfkit.validation. Returns a bare accept/reject.
"""
from mapfkit import AtVertex, Done, InTransit
from mapfkit.model import edge_duration, normalize_edge


def oracle_accepts(instance, plan) -> bool:
    graph = instance.graph
    if plan.makespan > instance.makespan_bound:
        return False
    if set(plan.timelines) != set(instance.agent_ids):
        return False

    rows = {}
    for spec in instance.agents:
        tl = plan.timelines[spec.id]
        if tl.birth < 0 or len(tl.route) != plan.makespan - tl.birth + 1:
            return False
        states = list(tl.route)
        done_from = None
        for i, s in enumerate(states):
            if isinstance(s, Done):
                done_from = i if done_from is None else done_from
            elif done_from is not None:
                return False
        completion = tl.birth + (done_from - 1 if done_from is not None else len(states) - 1)
        last = states[completion - tl.birth]
        if not (isinstance(last, AtVertex) and last.v == spec.goal):
            return False
        if completion > instance.makespan_bound:
            return False
        visited = {s.v for s in states if isinstance(s, AtVertex)}
        if not spec.waypoints <= visited:
            return False

        level = spec.battery_init
        expect = [level]
        for t in range(tl.birth, completion):
            level = instance.battery_max if t in tl.charge_times else level - 1
            expect.append(level)
        if list(tl.battery) != expect or any(b < 1 for b in expect):
            return False
        for t in sorted(tl.charge_times):
            if not tl.birth <= t < completion:
                return False
            s = states[t - tl.birth]
            if not (isinstance(s, AtVertex) and s.v in graph.charging):
                return False

        if not (isinstance(states[0], AtVertex) and states[0].v == spec.start):
            return False
        rows[spec.id] = (tl.birth, states, completion)

    def pose(aid, t):
        birth, states, completion = rows[aid]
        if t < birth:
            return None
        s = states[t - birth]
        if isinstance(s, Done):
            goal = instance.agent(aid).goal
            return ("v", goal)
        if isinstance(s, AtVertex):
            if s.v not in graph.vertices or s.v in graph.obstacles:
                return False
            return ("v", s.v)
        if not graph.has_edge(s.u, s.v):
            return False
        if s.u in graph.obstacles or s.v in graph.obstacles:
            return False
        if not 1 <= s.step < edge_duration(graph, s.u, s.v):
            return False
        return ("e", normalize_edge(s.u, s.v), s.u, s.v, s.step)

    def legal_move(aid, a, b):
        if a is False or b is False:
            return False
        if a is None:
            return b is not None and b[0] == "v"  # birth placement
        if a[0] == "v" and b[0] == "v":
            return a[1] == b[1] or (graph.has_edge(a[1], b[1])
                                    and edge_duration(graph, a[1], b[1]) == 1)
        if a[0] == "v" and b[0] == "e":
            return b[2] == a[1] and b[4] == 1
        if a[0] == "e" and b[0] == "e":
            return (a[2], a[3]) == (b[2], b[3]) and b[4] == a[4] + 1
        if a[0] == "e" and b[0] == "v":
            return b[1] == a[3] and a[4] == edge_duration(graph, a[2], a[3]) - 1
        return False

    ids = list(instance.agent_ids)
    for t in range(plan.makespan + 1):
        poses = {}
        for aid in ids:
            p = pose(aid, t)
            if p is False:
                return False
            if p is not None:
                poses[aid] = p
        seen_v, seen_e = {}, {}
        for aid, p in poses.items():
            if p[0] == "v":
                if p[1] in seen_v:
                    return False
                seen_v[p[1]] = aid
            else:
                if p[1] in seen_e:
                    return False
                seen_e[p[1]] = aid
        if t < plan.makespan:
            for aid in ids:
                if not legal_move(aid, pose(aid, t), pose(aid, t + 1)):
                    return False
            for i, a in enumerate(ids):
                for b in ids[i + 1:]:
                    pa0, pa1 = pose(a, t), pose(a, t + 1)
                    pb0, pb1 = pose(b, t), pose(b, t + 1)
                    if None in (pa0, pa1, pb0, pb1):
                        continue
                    if (pa0[0] == pa1[0] == pb0[0] == pb1[0] == "v"
                            and pa0[1] == pb1[1] and pa1[1] == pb0[1]
                            and pa0[1] != pa1[1]):
                        return False
    return True
