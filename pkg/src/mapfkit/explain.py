"""Query answering by counterfactual re-solving and relaxation probing.

Answers are structured objects first; the English sentence attached to each is
produced from the fixed template table below so that outputs can be compared
byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import InstanceIsFeasibleError, NoSuchWaitError, PlanInfeasibleError
from .model import (AgentTimeline, AtVertex, DONE, Done, Instance, Plan, Vertex, Violation,
                    replay_battery)
from .solver import Relaxation, WaitBan, solve_optimal
from .validation import INTER_AGENT_KINDS, categorize, validate
from .model import ViolationKind

TEMPLATES = {
    "T1": ("Actually, Robot {agent} does not have to wait at Cell {vertex} from time step "
           "{t0} to {t1}. Here is an alternative optimal plan."),
    "T2": ("Robot {agent} does not have to wait at Cell {vertex} so long, but it needs to "
           "follow a different itinerary and will be late by {delay} time step(s)."),
    "T3": "If Robot {agent} does not wait at Cell {vertex}, {consequence}.",
    "T4": "There is no solution because {consequence}.",
    "T5": ("There is no solution because Robot {agent} collides with the obstacle at "
           "Cell {vertex} at time step {time}; this suggests removing this obstacle."),
    "T6a": ("There is no solution within {bound} time steps because some more time is "
            "needed to complete tasks: {k} more time step(s) suffice."),
    "T6b": "There is no solution because some more charging is required; {consequence}.",
    "T7a": "The plan is infeasible due to {categories}.",
    "T7b": "The plan is feasible; no strictly better plan exists.",
    "T7c": "The plan is feasible, and a better plan exists: {improvement}.",
    "T7d": ("The plan is not optimal because some more time is needed to complete tasks: "
            "{time_delta} extra time step(s) compared to an optimal plan."),
    "T7e": ("The plan is not optimal because some more charging is required: "
            "{charge_delta} extra charge action(s) compared to an optimal plan."),
    "T7f": "The plan is optimal.",
}


@dataclass(frozen=True)
class ExplainConfig:
    delta_max: int = 3  # horizon slack probed when explaining infeasibility


# ---------------------------------------------------------------------------
# queries

@dataclass(frozen=True)
class WhyWait:
    agent: str
    vertex: Vertex
    window: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class WhyInfeasible:
    pass


@dataclass(frozen=True)
class CheckModifiedPlan:
    plan: Plan


@dataclass(frozen=True)
class WhyNonoptimal:
    plan: Plan


Query = Union[WhyWait, WhyInfeasible, CheckModifiedPlan, WhyNonoptimal]


# ---------------------------------------------------------------------------
# explanations

@dataclass(frozen=True)
class AlternativePlan:
    plan: Plan
    message: str
    kind = "alternative_plan"


@dataclass(frozen=True)
class DelayedItinerary:
    plan: Plan
    delay: int
    message: str
    kind = "delayed_itinerary"


@dataclass(frozen=True)
class CounterfactualConflict:
    violation: Violation
    message: str
    counterfactual_plan: Plan
    kind = "counterfactual_conflict"


@dataclass(frozen=True)
class RelaxationSuggestion:
    relaxation: Relaxation
    witness_plan: Plan
    first_violation: Violation
    message: str
    kind = "relaxation_suggestion"


@dataclass(frozen=True)
class OptimalityGap:
    time_delta: int
    charge_delta: int
    optimal_plan: Plan
    message: str
    kind = "optimality_gap"


@dataclass(frozen=True)
class FeasibilityConfirmed:
    better_plans: tuple[Plan, ...]
    message: str
    kind = "feasibility_confirmed"


@dataclass(frozen=True)
class InfeasibilityReport:
    categories: tuple[str, ...]
    violations: tuple[Violation, ...]
    message: str
    kind = "infeasibility_report"


Explanation = Union[AlternativePlan, DelayedItinerary, CounterfactualConflict,
                    RelaxationSuggestion, OptimalityGap, FeasibilityConfirmed,
                    InfeasibilityReport]


# ---------------------------------------------------------------------------
# wait queries

def _wait_steps(tl: AgentTimeline, vertex: Vertex, window: Optional[tuple[int, int]]):
    """Timesteps t where the agent starts a wait at ``vertex`` inside the window."""
    lo, hi = window if window is not None else (0, 10 ** 9)
    steps = []
    for t in range(tl.birth, tl.completion):
        i = t - tl.birth
        a, b = tl.route[i], tl.route[i + 1]
        if (isinstance(a, AtVertex) and isinstance(b, AtVertex)
                and a.v == b.v == vertex and lo <= t < hi):
            steps.append(t)
    return steps


def why_wait(instance: Instance, plan: Plan, agent: str, vertex: Vertex,
             window: Optional[tuple[int, int]] = None,
             deadline: Optional[float] = None) -> Explanation:
    """Explain an observed wait: alternative plan, delayed itinerary, or collision."""
    report = validate(instance, plan)
    if not report.feasible:
        raise PlanInfeasibleError("why-wait requires a feasible plan", report)
    tl = plan.timeline(agent)
    waits = _wait_steps(tl, vertex, window)
    if not waits:
        lo, hi = window if window is not None else (0, None)
        raise NoSuchWaitError(
            f"Robot {agent} never waits at Cell {vertex} within [{lo}, {hi})")

    base = solve_optimal(instance, deadline=deadline)
    assert base.is_sat, "a feasible plan exists, so the instance must be solvable"
    ban = WaitBan(agent, vertex, *(window if window is not None else (0, None)))
    relaxed = solve_optimal(instance, Relaxation(forbidden_waits=frozenset({ban})),
                            deadline=deadline)
    if relaxed.is_sat:
        delay = relaxed.plan.makespan - base.plan.makespan
        if delay == 0:
            first = waits[0]
            depart = first + 1
            n = len(tl.route)
            while depart - tl.birth < n and isinstance(tl.route[depart - tl.birth], AtVertex) \
                    and tl.route[depart - tl.birth].v == vertex:
                depart += 1
            msg = TEMPLATES["T1"].format(agent=agent, vertex=vertex, t0=first, t1=depart)
            return AlternativePlan(relaxed.plan, msg)
        msg = TEMPLATES["T2"].format(agent=agent, vertex=vertex, delay=delay)
        return DelayedItinerary(relaxed.plan, delay, msg)

    shifted = _remove_waits(instance, plan, agent, vertex, window)
    report = validate(instance, shifted)
    assert report.violations, "removing the waits of an unsolvable ban must break the plan"
    first = report.violations[0]
    msg = TEMPLATES["T3"].format(agent=agent, vertex=vertex, consequence=first.describe())
    return CounterfactualConflict(first, msg, shifted)


def _remove_waits(instance: Instance, plan: Plan, agent: str, vertex: Vertex,
                  window: Optional[tuple[int, int]]) -> Plan:
    """Shift the trajectory earlier over the deleted waits and pad at the goal."""
    tl = plan.timeline(agent)
    waits = set(_wait_steps(tl, vertex, window))
    keep_states = []
    charge_times = []
    for i, state in enumerate(tl.route):
        t = tl.birth + i
        if t - 1 in waits:  # the second state of a removed wait step disappears
            continue
        if isinstance(state, Done):
            break
        keep_states.append(state)
    new_t = tl.birth
    kept_charges = set()
    for t in range(tl.birth, tl.completion):
        if t in waits:
            continue
        if t in tl.charge_times:
            kept_charges.add(new_t)
        new_t += 1
    completion = tl.birth + len(keep_states) - 1
    route = tuple(keep_states) + (DONE,) * (plan.makespan - completion)
    spec = instance.agent(agent)
    battery = replay_battery(spec.battery_init, completion - tl.birth + 1,
                             frozenset(kept_charges), instance.battery_max, t0=tl.birth)
    timelines = dict(plan.timelines)
    timelines[agent] = AgentTimeline(route, tuple(battery), frozenset(kept_charges),
                                     birth=tl.birth)
    return Plan(plan.makespan, timelines)


# ---------------------------------------------------------------------------
# infeasibility queries

def why_infeasible(instance: Instance, config: ExplainConfig = ExplainConfig(),
                   deadline: Optional[float] = None) -> list[Explanation]:
    """Probe relaxations in fixed order; each satisfiable probe yields a suggestion."""
    base = solve_optimal(instance, deadline=deadline)
    if base.is_sat:
        raise InstanceIsFeasibleError("the instance has a solution; nothing to explain")

    out: list[Explanation] = []

    res = solve_optimal(instance, Relaxation(ignore_agent_collisions=True), deadline=deadline)
    if res.is_sat:
        report = validate(instance, res.plan)
        inter = [v for v in report.violations if v.kind in INTER_AGENT_KINDS]
        assert inter, "a collision-free witness would make the instance solvable"
        first = inter[0]
        msg = TEMPLATES["T4"].format(consequence=first.describe())
        out.append(RelaxationSuggestion(Relaxation(ignore_agent_collisions=True),
                                        res.plan, first, msg))

    for obstacle in sorted(instance.graph.obstacles):
        relax = Relaxation(ignored_obstacles=frozenset({obstacle}))
        res = solve_optimal(instance, relax, deadline=deadline)
        if not res.is_sat:
            continue
        report = validate(instance, res.plan)
        hits = [v for v in report.violations
                if v.kind is ViolationKind.OBSTACLE_COLLISION
                and (v.where == obstacle or (isinstance(v.where, tuple) and obstacle in v.where))]
        assert hits, "the witness must cross the obstacle whose removal enabled it"
        first = hits[0]
        msg = TEMPLATES["T5"].format(agent=first.agents[0], vertex=obstacle, time=first.time)
        out.append(RelaxationSuggestion(relax, res.plan, first, msg))

    if config.delta_max > 0:
        relax = Relaxation(extra_horizon=config.delta_max)
        res = solve_optimal(instance, relax, deadline=deadline)
        if res.is_sat:
            k = res.plan.makespan - instance.makespan_bound
            report = validate(instance, res.plan)
            first = min((v for v in report.violations
                         if v.kind is ViolationKind.HORIZON_EXCEEDED),
                        key=Violation.sort_key)
            msg = TEMPLATES["T6a"].format(bound=instance.makespan_bound, k=k)
            out.append(RelaxationSuggestion(relax, res.plan, first, msg))

    relax = Relaxation(unlimited_battery=True)
    res = solve_optimal(instance, relax, deadline=deadline)
    if res.is_sat:
        report = validate(instance, res.plan)
        first = min((v for v in report.violations
                     if v.kind is ViolationKind.BATTERY_DEPLETED),
                    key=Violation.sort_key)
        msg = TEMPLATES["T6b"].format(consequence=first.describe())
        out.append(RelaxationSuggestion(relax, res.plan, first, msg))

    return out


# ---------------------------------------------------------------------------
# plan checks

def check_modified_plan(instance: Instance, plan: Plan,
                        deadline: Optional[float] = None) -> Explanation:
    """Total check: infeasibility report, or confirmation plus a better plan if one exists."""
    report = validate(instance, plan)
    if not report.feasible:
        cats = categorize(report)
        msg = TEMPLATES["T7a"].format(categories=" and ".join(cats))
        return InfeasibilityReport(tuple(cats), report.violations, msg)
    opt = solve_optimal(instance, deadline=deadline)
    assert opt.is_sat
    mine = plan.objective_vector(instance.objectives)
    best = opt.plan.objective_vector(instance.objectives)
    if best < mine:
        improvement = "less charging is needed"
        for name, b, m in zip(instance.objectives, best, mine):
            if b != m:
                if name in ("makespan", "total_time"):
                    improvement = "the tasks can be completed earlier"
                break
        msg = TEMPLATES["T7c"].format(improvement=improvement)
        return FeasibilityConfirmed((opt.plan,), msg)
    return FeasibilityConfirmed((), TEMPLATES["T7b"])


def why_nonoptimal(instance: Instance, plan: Plan,
                   deadline: Optional[float] = None) -> Explanation:
    """Gap between a feasible plan and the lexicographic optimum."""
    report = validate(instance, plan)
    if not report.feasible:
        raise PlanInfeasibleError("why-nonoptimal requires a feasible plan", report)
    opt = solve_optimal(instance, deadline=deadline)
    assert opt.is_sat
    time_delta = plan.makespan - opt.plan.makespan
    charge_delta = plan.charges() - opt.plan.charges()
    if time_delta > 0:
        msg = TEMPLATES["T7d"].format(time_delta=time_delta)
    elif charge_delta > 0:
        msg = TEMPLATES["T7e"].format(charge_delta=charge_delta)
    else:
        msg = TEMPLATES["T7f"]
    return OptimalityGap(time_delta, charge_delta, opt.plan, msg)
