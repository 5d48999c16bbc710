"""Dual-route agreement: the validator versus an independent plan acceptor."""
import pytest

from mapfkit import AgentTimeline, Plan, brute_force_optimal, single_agent_optimal, solve_optimal, validate
from mapfkit.model import replay_battery
from mapfkit.randgen import random_instance
from mapfkit import presets

from oracle_replay import oracle_accepts

SEEDS = list(range(1, 41))


def mutations(instance, plan):
    """Structurally sound plan variants that may or may not stay feasible."""
    out = []
    for aid in plan.agent_ids:
        tl = plan.timelines[aid]
        if tl.charge_times:
            dropped = sorted(tl.charge_times)[0]
            charges = frozenset(tl.charge_times - {dropped})
            spec = instance.agent(aid)
            battery = replay_battery(spec.battery_init, tl.completion - tl.birth + 1,
                                     charges, instance.battery_max, t0=tl.birth)
            timelines = dict(plan.timelines)
            timelines[aid] = AgentTimeline(tl.route, tuple(battery), charges, tl.birth)
            out.append(Plan(plan.makespan, timelines))
    for aid in plan.agent_ids:
        solo = single_agent_optimal(instance, aid)
        if not solo.is_sat:
            continue
        solo_tl = solo.plan.timelines[aid]
        if solo.plan.makespan > plan.makespan:
            continue
        from mapfkit import DONE
        route = solo_tl.route + (DONE,) * (plan.makespan - solo.plan.makespan)
        timelines = dict(plan.timelines)
        timelines[aid] = AgentTimeline(route, solo_tl.battery, solo_tl.charge_times)
        out.append(Plan(plan.makespan, timelines))
    return out


@pytest.mark.parametrize("seed", SEEDS)
def test_validator_agrees_with_independent_acceptor(seed):
    instance = random_instance(seed)
    res = solve_optimal(instance)
    if not res.is_sat:
        assert brute_force_optimal(instance).outcome == "unsat"
        return
    plans = [res.plan] + mutations(instance, res.plan)
    for i, plan in enumerate(plans):
        mine = validate(instance, plan).feasible
        theirs = oracle_accepts(instance, plan)
        assert mine == theirs, f"seed {seed} variant {i}: validator {mine}, acceptor {theirs}"
    assert validate(instance, res.plan).feasible


def test_reference_fixtures_agree():
    cases = [
        (presets.warehouse_3x10(), presets.warehouse_3x10_plan(), True),
        (presets.wait_query_world(), presets.wait_query_plan_initial_wait(), True),
        (presets.wait_query_world(), presets.wait_query_plan_no_wait(), True),
    ]
    for instance, plan, expected in cases:
        assert validate(instance, plan).feasible is expected
        assert oracle_accepts(instance, plan) is expected
