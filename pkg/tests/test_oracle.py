import pytest

from mapfkit import (AgentSpec, CapExceededError, Instance, Relaxation,
                     brute_force_optimal, solve_optimal, validate)


class TestBruteForce:
    def test_crossing_optimum(self, crossing):
        res = brute_force_optimal(crossing)
        assert res.is_sat and res.plan.makespan == 4
        assert validate(crossing, res.plan).feasible

    def test_blocked_swap_exhausts_the_space(self, blocked_swap):
        res = brute_force_optimal(blocked_swap)
        assert res.outcome == "unsat"
        assert res.stats.layers == 8
        assert res.stats.states_seen > 0

    def test_start_equals_goal(self, crossing):
        inst = Instance(crossing.graph, [AgentSpec("solo", 5, 5, battery_init=3)],
                        battery_max=10, makespan_bound=4)
        res = brute_force_optimal(inst)
        assert res.is_sat and res.plan.makespan == 0

    def test_obstacle_two_removal_opens_the_swap(self, blocked_swap):
        res = brute_force_optimal(blocked_swap, Relaxation(ignored_obstacles=frozenset({2})))
        assert res.is_sat
        assert res.plan.makespan == 6
        assert validate(blocked_swap, res.plan,
                        Relaxation(ignored_obstacles=frozenset({2}))).feasible

    def test_no_makespan_three_plan_for_wait_query(self, wait_query):
        tight = wait_query.replace(makespan_bound=3)
        assert brute_force_optimal(tight).outcome == "unsat"

    def test_cap_guard(self, warehouse):
        with pytest.raises(CapExceededError):
            brute_force_optimal(warehouse, state_cap=1000)

    def test_agrees_with_solver_on_fixtures(self, crossing, wait_query, blocked_swap):
        for inst in (crossing, wait_query, blocked_swap):
            b = brute_force_optimal(inst)
            s = solve_optimal(inst)
            assert b.outcome == s.outcome
            if b.is_sat:
                assert (b.plan.objective_vector(inst.objectives)
                        == s.plan.objective_vector(inst.objectives))

    def test_forbidden_waits_respected(self, wait_query):
        from mapfkit import WaitBan
        relax = Relaxation(forbidden_waits=frozenset({WaitBan("A2", 8)}))
        res = brute_force_optimal(wait_query, relax)
        assert res.is_sat
        tl = res.plan.timelines["A2"]
        cells = [getattr(s, "v", None) for s in tl.route]
        assert not any(a == b == 8 for a, b in zip(cells, cells[1:]))
