import pytest

from mapfkit import (AgentSpec, AgentTimeline, AtVertex, DONE, GridSpec, InstanceIsFeasibleError,
                     Instance, NoSuchWaitError, Plan, PlanInfeasibleError, Relaxation,
                     ViolationKind, WaitBan, WorldGraph, brute_force_optimal, build_graph,
                     check_modified_plan, validate, why_infeasible,
                     why_nonoptimal, why_wait)
from mapfkit.explain import (AlternativePlan, CounterfactualConflict, DelayedItinerary,
                             FeasibilityConfirmed, InfeasibilityReport, OptimalityGap)
from mapfkit.model import replay_battery
from mapfkit.validation import CATEGORY_BATTERY

def tl(cells, battery_init, bmax, charges=(), makespan=None, birth=0):
    makespan = makespan if makespan is not None else birth + len(cells) - 1
    route = [DONE if c == "done" else AtVertex(c) for c in cells]
    completion = birth + len(cells) - 1 - sum(1 for c in cells if c == "done")
    battery = replay_battery(battery_init, completion - birth + 1, frozenset(charges),
                             bmax, t0=birth)
    route += [DONE] * (makespan - birth + 1 - len(route))
    return AgentTimeline(tuple(route), tuple(battery), frozenset(charges), birth)


class TestWhyWait:
    def test_initial_wait_has_an_alternative_optimal_plan(self, wait_query, plan1, plan2):
        exp = why_wait(wait_query, plan1, "A2", 8)
        assert isinstance(exp, AlternativePlan)
        assert exp.plan == plan2
        assert exp.message == ("Actually, Robot A2 does not have to wait at Cell 8 from "
                               "time step 0 to 2. Here is an alternative optimal plan.")
        a2 = exp.plan.timelines["A2"]
        cells = [getattr(s, "v", None) for s in a2.route]
        assert not any(a == b == 8 for a, b in zip(cells, cells[1:]))

    def test_agent_without_wait_raises(self, wait_query, plan2):
        with pytest.raises(NoSuchWaitError):
            why_wait(wait_query, plan2, "A2", 8)

    def test_window_outside_wait_raises(self, wait_query, plan1):
        with pytest.raises(NoSuchWaitError):
            why_wait(wait_query, plan1, "A2", 8, window=(2, 4))

    def test_infeasible_plan_rejected(self, wait_query, plan1):
        broken = Plan(4, {"A1": plan1.timelines["A1"],
                          "A2": tl([8, 7, 6, 2, "done"], 10, 10)})
        with pytest.raises(PlanInfeasibleError):
            why_wait(wait_query, broken, "A2", 8)

    def test_forced_wait_yields_counterfactual_conflict(self):
        # line 1-2-3 plus spur 2-4; B must let A through and the bound leaves no detour
        graph = WorldGraph([1, 2, 3, 4], [(1, 2, 1), (2, 3, 1), (2, 4, 1)])
        inst = Instance(graph, [AgentSpec("A", 1, 3, battery_init=9),
                                AgentSpec("B", 4, 1, battery_init=9)],
                        battery_max=9, makespan_bound=3)
        plan = Plan(3, {"A": tl([1, 2, 3, "done"], 9, 9),
                        "B": tl([4, 4, 2, 1], 9, 9)})
        assert validate(inst, plan).feasible
        # independent confirmation: no plan avoids B's wait at 4 within the bound
        ban = Relaxation(forbidden_waits=frozenset({WaitBan("B", 4)}))
        assert brute_force_optimal(inst, ban).outcome == "unsat"
        exp = why_wait(inst, plan, "B", 4)
        assert isinstance(exp, CounterfactualConflict)
        assert exp.violation.kind is ViolationKind.VERTEX_CONFLICT
        assert exp.violation.where == 2 and exp.violation.time == 1
        assert "it will collide" not in exp.message  # phrasing comes from the violation
        assert "collide at Cell 2 at time step 1" in exp.message
        assert not validate(inst, exp.counterfactual_plan).feasible

    def test_spur_rewiring_still_admits_a_waitless_optimum(self, plan1):
        # moving the corner robot behind its peer leaves a wait-free plan, so the
        # query is answered with an alternative rather than a counterfactual
        graph = WorldGraph([2, 5, 6, 7, 8, 11],
                           [(8, 11, 1), (7, 8, 1), (6, 7, 1), (5, 6, 1), (2, 6, 1)])
        inst = Instance(graph, [AgentSpec("A1", 11, 5, frozenset({7}), 10),
                                AgentSpec("A2", 8, 2, frozenset({7}), 10)],
                        battery_max=10, makespan_bound=4)
        ban = Relaxation(forbidden_waits=frozenset({WaitBan("A2", 8)}))
        assert brute_force_optimal(inst, ban).is_sat
        plan = Plan(4, {"A1": tl([11, 8, 7, 6, 5], 10, 10),
                        "A2": tl([8, 7, 6, 2, "done"], 10, 10)})
        assert validate(inst, plan).feasible

    def test_delayed_itinerary_when_avoiding_the_wait_costs_time(self):
        # B can dodge into the spur instead of waiting, arriving one step late
        graph = WorldGraph([1, 2, 3, 4, 5], [(1, 2, 1), (2, 3, 1), (2, 4, 1), (2, 5, 1)])
        inst = Instance(graph, [AgentSpec("A", 1, 3, battery_init=9),
                                AgentSpec("B", 4, 1, battery_init=9)],
                        battery_max=9, makespan_bound=4)
        plan = Plan(3, {"A": tl([1, 2, 3, "done"], 9, 9),
                        "B": tl([4, 4, 2, 1], 9, 9)})
        exp = why_wait(inst, plan, "B", 4)
        assert isinstance(exp, DelayedItinerary)
        assert exp.delay == 1
        assert "late by 1 time step(s)" in exp.message
        assert validate(inst, exp.plan).feasible


class TestWhyInfeasible:
    def test_blocked_swap_probes(self, blocked_swap):
        exps = why_infeasible(blocked_swap)
        assert len(exps) == 3
        first = exps[0]
        assert first.relaxation.ignore_agent_collisions
        assert first.first_violation.kind is ViolationKind.VERTEX_CONFLICT
        assert first.message == ("There is no solution because Robot R1 and Robot R2 "
                                 "collide at Cell 8 at time step 3.")
        assert validate(blocked_swap, first.witness_plan,
                        Relaxation(ignore_agent_collisions=True)).feasible

        second = exps[1]
        assert second.relaxation.ignored_obstacles == frozenset({2})
        assert second.message == ("There is no solution because Robot R1 collides with the "
                                  "obstacle at Cell 2 at time step 1; this suggests removing "
                                  "this obstacle.")
        assert validate(blocked_swap, second.witness_plan, second.relaxation).feasible

        third = exps[2]
        assert third.relaxation.ignored_obstacles == frozenset({5})
        assert validate(blocked_swap, third.witness_plan, third.relaxation).feasible

    def test_feasible_instance_is_an_error(self, wait_query):
        with pytest.raises(InstanceIsFeasibleError):
            why_infeasible(wait_query)

    def test_walled_goal_yields_only_obstacle_probes(self):
        grid = GridSpec(3, 3, obstacles=frozenset({6, 8}))
        inst = Instance(build_graph(grid), [AgentSpec("R1", 1, 9, battery_init=9)],
                        battery_max=9, makespan_bound=8)
        exps = why_infeasible(inst)
        assert len(exps) == 2
        assert all(e.relaxation.ignored_obstacles for e in exps)
        assert [min(e.relaxation.ignored_obstacles) for e in exps] == [6, 8]

    def test_too_tight_horizon_suggests_more_time(self, crossing):
        tight = crossing.replace(makespan_bound=3)
        exps = why_infeasible(tight)
        timed = [e for e in exps if e.relaxation.extra_horizon]
        assert len(timed) == 1
        assert timed[0].message == ("There is no solution within 3 time steps because some "
                                    "more time is needed to complete tasks: 1 more time "
                                    "step(s) suffice.")
        assert timed[0].first_violation.kind is ViolationKind.HORIZON_EXCEEDED

    def test_starved_battery_suggests_charging(self):
        grid = GridSpec(1, 6)
        inst = Instance(build_graph(grid), [AgentSpec("a", 1, 6, battery_init=4)],
                        battery_max=4, makespan_bound=8)
        exps = why_infeasible(inst)
        assert len(exps) == 1
        assert exps[0].relaxation.unlimited_battery
        assert "more charging is required" in exps[0].message
        assert exps[0].first_violation.kind is ViolationKind.BATTERY_DEPLETED

    def test_probe_order_and_bytes_are_stable(self, blocked_swap):
        from mapfkit import formats
        one = [formats.explanation_to_json(e) for e in why_infeasible(blocked_swap)]
        two = [formats.explanation_to_json(e) for e in why_infeasible(blocked_swap)]
        assert one == two


class TestCheckModifiedPlan:
    def test_optimal_plan_confirmed_without_better(self, wait_query, plan2):
        exp = check_modified_plan(wait_query, plan2)
        assert isinstance(exp, FeasibilityConfirmed)
        assert exp.better_plans == ()
        assert exp.message == "The plan is feasible; no strictly better plan exists."

    def test_padded_plan_gets_a_better_alternative(self, wait_query, plan1):
        inst = wait_query.replace(makespan_bound=5)
        slow = Plan(5, {"A1": tl([11, 7, 6, 5, "done", "done"], 10, 10),
                        "A2": tl([8, 8, 7, 6, 6, 2], 10, 10)})
        assert validate(inst, slow).feasible
        exp = check_modified_plan(inst, slow)
        assert isinstance(exp, FeasibilityConfirmed)
        assert len(exp.better_plans) == 1
        assert exp.better_plans[0].total_time() < slow.total_time()
        assert "completed earlier" in exp.message

    def test_broken_charge_reports_low_battery(self, warehouse, warehouse_plan):
        a2 = warehouse_plan.timelines["A2"]
        battery = replay_battery(8, 19, frozenset({13}), 10)
        broken = Plan(18, {"A1": warehouse_plan.timelines["A1"],
                           "A2": AgentTimeline(a2.route, tuple(battery), frozenset({13}))})
        exp = check_modified_plan(warehouse, broken)
        assert isinstance(exp, InfeasibilityReport)
        assert CATEGORY_BATTERY in exp.categories
        assert "low battery-level" in exp.message


class TestWhyNonoptimal:
    def test_optimal_plan_reports_zero_gap(self, wait_query, plan1):
        exp = why_nonoptimal(wait_query, plan1)
        assert isinstance(exp, OptimalityGap)
        assert (exp.time_delta, exp.charge_delta) == (0, 0)
        assert exp.message == "The plan is optimal."

    def test_padding_adds_exactly_one_step(self, wait_query, plan1):
        inst = wait_query.replace(makespan_bound=5)
        padded = Plan(5, {"A1": tl([11, 7, 6, 5, "done", "done"], 10, 10),
                          "A2": tl([8, 8, 7, 6, 2, "done"], 10, 10)})
        exp = why_nonoptimal(inst, padded)
        assert exp.time_delta == 1
        assert "some more time is needed" in exp.message

    def test_gratuitous_charge_reports_charge_gap(self):
        grid = GridSpec(1, 5, charging=frozenset({3}))
        inst = Instance(build_graph(grid), [AgentSpec("a", 1, 5, battery_init=10)],
                        battery_max=10, makespan_bound=4)
        plan = Plan(4, {"a": tl([1, 2, 3, 4, 5], 10, 10, charges=(2,))})
        exp = why_nonoptimal(inst, plan)
        assert (exp.time_delta, exp.charge_delta) == (0, 1)
        assert "more charging is required" in exp.message

    def test_two_charges_where_one_suffices(self):
        grid = GridSpec(1, 5, charging=frozenset({2, 3}))
        inst = Instance(build_graph(grid), [AgentSpec("a", 1, 5, battery_init=4)],
                        battery_max=4, makespan_bound=4)
        plan = Plan(4, {"a": tl([1, 2, 3, 4, 5], 4, 4, charges=(1, 2))})
        assert validate(inst, plan).feasible
        opt = brute_force_optimal(inst)
        assert opt.plan.charges() == 1
        exp = why_nonoptimal(inst, plan)
        assert exp.time_delta == 0 and exp.charge_delta >= 1

    def test_infeasible_plan_rejected(self, wait_query, plan1):
        broken = Plan(4, {"A1": plan1.timelines["A1"],
                          "A2": tl([8, 7, 6, 2, "done"], 10, 10)})
        with pytest.raises(PlanInfeasibleError) as err:
            why_nonoptimal(wait_query, broken)
        assert err.value.report is not None


class TestWitnessIntegrity:
    def test_every_embedded_plan_validates_under_its_relaxation(self, blocked_swap):
        for exp in why_infeasible(blocked_swap):
            assert validate(blocked_swap, exp.witness_plan, exp.relaxation).feasible

    def test_alternative_plan_matches_forbidden_wait_decision(self, wait_query, plan1, plan2):
        from mapfkit import solve_decision
        exp = why_wait(wait_query, plan1, "A2", 8)
        relax = Relaxation(forbidden_waits=frozenset({WaitBan("A2", 8)}))
        dec = solve_decision(wait_query, 4, relax)
        assert isinstance(exp, AlternativePlan) is dec.is_sat
        assert exp.plan == dec.plan == plan2
