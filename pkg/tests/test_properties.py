"""Property suites over randomly generated instances (1000+ cases each)."""
from hypothesis import HealthCheck, given, settings, strategies as st

from mapfkit import (AgentJoin, AgentSpec, AtVertex, Done, GridSpec, Instance, ViolationKind,
                     apply_event, begin_execution, build_graph, resolve_dynamic, solve_optimal,
                     validate)
from mapfkit.validation import INTER_AGENT_KINDS

COMMON = dict(max_examples=1000, deadline=None, derandomize=True,
              suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much,
                                     HealthCheck.data_too_large])


@st.composite
def small_instances(draw):
    rows, cols = 3, 3
    n = rows * cols
    obstacle_count = draw(st.integers(0, 2))
    layout = draw(st.permutations(list(range(1, n + 1))))
    obstacles = frozenset(layout[:obstacle_count])
    free = layout[obstacle_count:]
    starts = free[0:2]
    goals = [draw(st.sampled_from(free)), None]
    goals[1] = draw(st.sampled_from([c for c in free if c != goals[0]]))
    charging = frozenset(free[2:3]) if draw(st.booleans()) else frozenset()
    battery_max = draw(st.integers(4, 8))
    agents = []
    for i in range(2):
        wp = frozenset([draw(st.sampled_from(free))]) if draw(st.booleans()) else frozenset()
        agents.append(AgentSpec(f"a{i + 1}", starts[i], goals[i], wp,
                                battery_init=draw(st.integers(3, battery_max))))
    grid = GridSpec(rows=rows, cols=cols, obstacles=obstacles, charging=charging)
    bound = draw(st.integers(4, 6))
    return Instance(build_graph(grid), agents, battery_max=battery_max, makespan_bound=bound,
                    grid=grid)


@settings(**COMMON)
@given(small_instances())
def test_battery_transitions_on_solved_plans(instance):
    res = solve_optimal(instance)
    if not res.is_sat:
        return
    for aid, tl in res.plan.timelines.items():
        spec = instance.agent(aid)
        assert tl.battery[0] == spec.battery_init
        for i in range(len(tl.battery) - 1):
            t = tl.birth + i
            level, nxt = tl.battery[i], tl.battery[i + 1]
            assert nxt in (level - 1, instance.battery_max)
            if t in tl.charge_times:
                assert nxt == instance.battery_max
                state = tl.route[i]
                assert isinstance(state, AtVertex)
                assert state.v in instance.graph.charging
            else:
                assert nxt == level - 1
        assert all(level >= 1 for level in tl.battery)


@settings(**COMMON)
@given(small_instances())
def test_solved_plans_are_conflict_free_under_replay(instance):
    res = solve_optimal(instance)
    if not res.is_sat:
        return
    report = validate(instance, res.plan)
    assert report.feasible
    assert not any(v.kind in INTER_AGENT_KINDS for v in report.violations)
    assert not any(v.kind is ViolationKind.OBSTACLE_COLLISION for v in report.violations)


@settings(**COMMON)
@given(small_instances(), st.integers(0, 10 ** 6), st.integers(1, 4))
def test_dynamic_resolves_preserve_committed_prefixes(instance, join_pick, when):
    base = solve_optimal(instance)
    if not base.is_sat or base.plan.makespan < 1:
        return
    from mapfkit.dynamics import occupied_vertices
    state = begin_execution(instance, base.plan)
    t_now = min(when, base.plan.makespan)
    occupied = set(occupied_vertices(base.plan, t_now))
    goals = {a.goal for a in instance.agents}
    candidates = sorted(instance.graph.vertices - instance.graph.obstacles - occupied)
    free_goals = sorted(instance.graph.vertices - instance.graph.obstacles - goals)
    if not candidates or not free_goals:
        return
    start = candidates[join_pick % len(candidates)]
    goal = free_goals[join_pick % len(free_goals)]
    spec = AgentSpec("zz", start, goal, battery_init=instance.battery_max)
    state = apply_event(state, AgentJoin(t_now, spec))
    res = resolve_dynamic(state)
    if not res.is_sat or res.method != "revise_augment":
        return
    for aid in base.plan.agent_ids:
        new, old = res.plan.timelines[aid], base.plan.timelines[aid]
        cut = t_now - old.birth
        assert new.route[:cut] == old.route[:cut]

        def distinct(route, start_idx):
            seq = []
            for s in route[start_idx:]:
                if isinstance(s, Done):
                    break
                if isinstance(s, AtVertex) and (not seq or seq[-1] != s.v):
                    seq.append(s.v)
            return seq

        assert distinct(new.route, cut) == distinct(old.route, cut)
    report = validate(state.instance, res.plan)
    assert report.feasible


@settings(max_examples=300, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.too_slow])
@given(small_instances())
def test_validator_agrees_with_reference_feasibility(instance):
    # sat solves validate; unsat instances reject the straight-line guess plan
    res = solve_optimal(instance)
    if res.is_sat:
        assert validate(instance, res.plan).feasible
    else:
        from mapfkit import brute_force_optimal
        assert brute_force_optimal(instance).outcome == "unsat"
