"""Command-line surface: solve, validate, explain, dynamic, serve, import-ascii.

All machine output is canonical JSON on stdout; ``--pretty`` switches to a
human rendering. Exit codes: 0 answered, 2 usage, 3 schema or rejected input,
4 negative answer (unsat / infeasible / failed precondition), 5 timeout.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from . import formats
from .dynamics import DynamicPolicy, apply_event, begin_execution, resolve_dynamic
from .errors import (EventRejectedError, InstanceIsFeasibleError, MapfError, NoSuchWaitError,
                     PlanInfeasibleError, SchemaError)
from .explain import ExplainConfig, check_modified_plan, why_infeasible, why_nonoptimal, why_wait
from .model import AgentSpec, AtVertex, Done, Instance, Plan, build_graph
from .solver import deadline_from_timeout, solve_optimal
from .validation import validate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_NEGATIVE = 4
EXIT_TIMEOUT = 5


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise SchemaError("$", f"cannot read {path}: {e.strerror}") from None


def _emit(doc: dict, pretty_lines: Optional[list[str]], pretty: bool) -> None:
    if pretty and pretty_lines is not None:
        sys.stdout.write("\n".join(pretty_lines) + "\n")
    else:
        sys.stdout.buffer.write(formats.dumps_canonical(doc))


def _fail(err: MapfError, code: int) -> int:
    sys.stdout.buffer.write(formats.dumps_canonical({"error": err.to_json()}))
    return code


def render_plan(plan: Plan, instance: Optional[Instance] = None) -> list[str]:
    """Traversal table: one location row and one battery row per agent."""
    times = list(range(0, plan.makespan + 1))
    rows = [["Time"] + [str(t) for t in times]]
    for aid in plan.timelines:
        tl = plan.timelines[aid]
        loc, bat = [f"{aid} Location"], [f"{aid} Battery"]
        for t in times:
            if t < tl.birth:
                loc.append(".")
                bat.append(".")
                continue
            state = tl.route[t - tl.birth]
            if isinstance(state, Done):
                loc.append("--")
            elif isinstance(state, AtVertex):
                loc.append(str(state.v))
            else:
                loc.append("tr")
            i = t - tl.birth
            bat.append(str(tl.battery[i]) if i < len(tl.battery) else "--")
        rows.append(loc)
        rows.append(bat)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return [" ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]


def _cmd_solve(args) -> int:
    instance = formats.parse_instance(_read(args.instance))
    if args.makespan is not None:
        instance = instance.replace(makespan_bound=args.makespan)
    res = solve_optimal(instance, deadline=deadline_from_timeout(args.timeout))
    doc = formats.solve_result_to_json(res, include_wall_time=args.stats)
    if res.outcome == "timeout":
        _emit(doc, ["timeout"], args.pretty)
        return EXIT_TIMEOUT
    if res.outcome == "unsat":
        _emit(doc, ["unsat: no plan within the makespan bound"], args.pretty)
        return EXIT_NEGATIVE
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(formats.serialize_plan(res.plan))
    _emit(doc, [f"sat: makespan {res.plan.makespan}"] + render_plan(res.plan), args.pretty)
    return EXIT_OK


def _cmd_validate(args) -> int:
    instance = formats.parse_instance(_read(args.instance))
    plan = formats.parse_plan(_read(args.plan), instance)
    report = validate(instance, plan)
    lines = ["feasible" if report.feasible else "infeasible"]
    lines += ["  " + v.describe() for v in report.violations]
    _emit(report.to_json(), lines, args.pretty)
    return EXIT_OK if report.feasible else EXIT_NEGATIVE


def _parse_why_wait(spec: str):
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise SchemaError("$.why-wait", f"expected AGENT:VERTEX[:T0-T1], got {spec!r}")
    agent, vertex = parts[0], parts[1]
    if not vertex.isdigit():
        raise SchemaError("$.why-wait", f"vertex must be an integer, got {vertex!r}")
    window = None
    if len(parts) == 3:
        lo, sep, hi = parts[2].partition("-")
        if not sep or not lo.isdigit() or not hi.isdigit():
            raise SchemaError("$.why-wait", f"window must be T0-T1, got {parts[2]!r}")
        window = (int(lo), int(hi))
    return agent, int(vertex), window


def _cmd_explain(args) -> int:
    instance = formats.parse_instance(_read(args.instance))
    deadline = deadline_from_timeout(args.timeout)
    config = ExplainConfig(delta_max=args.delta_max)
    try:
        if args.why_wait:
            if not args.plan:
                raise SchemaError("$.plan", "--why-wait requires --plan")
            agent, vertex, window = _parse_why_wait(args.why_wait)
            plan = formats.parse_plan(_read(args.plan), instance)
            exp = why_wait(instance, plan, agent, vertex, window, deadline=deadline)
            _emit(formats.explanation_to_json(exp), [exp.message], args.pretty)
            return EXIT_OK
        if args.why_infeasible:
            exps = why_infeasible(instance, config, deadline=deadline)
            doc = {"explanations": [formats.explanation_to_json(e) for e in exps]}
            if not exps:
                doc["message"] = ("no single-change relaxation explains the infeasibility; "
                                  "combined causes are beyond these probes")
            _emit(doc, [e.message for e in exps] or [doc.get("message", "")], args.pretty)
            return EXIT_OK
        if args.check_plan:
            plan = formats.parse_plan(_read(args.check_plan), instance)
            exp = check_modified_plan(instance, plan, deadline=deadline)
            _emit(formats.explanation_to_json(exp), [exp.message], args.pretty)
            return EXIT_OK
        if args.why_nonoptimal:
            plan = formats.parse_plan(_read(args.why_nonoptimal), instance)
            exp = why_nonoptimal(instance, plan, deadline=deadline)
            _emit(formats.explanation_to_json(exp), [exp.message], args.pretty)
            return EXIT_OK
    except (InstanceIsFeasibleError, NoSuchWaitError, PlanInfeasibleError) as e:
        return _fail(e, EXIT_NEGATIVE)
    raise SchemaError("$", "one of --why-wait/--why-infeasible/--check-plan/--why-nonoptimal "
                           "is required")


def _cmd_dynamic(args) -> int:
    instance = formats.parse_instance(_read(args.instance))
    events = formats.parse_events(_read(args.events))
    deadline = deadline_from_timeout(args.timeout)
    policy = DynamicPolicy(delta_max=args.delta_max, fallback_replan=not args.no_fallback)

    initial = solve_optimal(instance, deadline=deadline)
    doc = {"initial": formats.solve_result_to_json(initial)}
    lines = [f"initial solve: {initial.outcome}"]
    if initial.outcome != "sat":
        _emit(doc, lines, args.pretty)
        return EXIT_TIMEOUT if initial.outcome == "timeout" else EXIT_NEGATIVE

    state = begin_execution(instance, initial.plan)
    steps = []
    by_time: dict[int, list] = {}
    for ev in sorted(events, key=lambda e: e.time):
        by_time.setdefault(ev.time, []).append(ev)
    rc = EXIT_OK
    for t in sorted(by_time):
        batch = by_time[t]
        for ev in batch:
            state = apply_event(state, ev)
        res = resolve_dynamic(state, policy, deadline=deadline)
        steps.append({"time": t, "events": [formats.event_to_json(e) for e in batch],
                      "result": formats.dynamic_result_to_json(res)})
        lines.append(f"t={t}: {len(batch)} event(s) -> {res.outcome}"
                     + (f" via {res.method} at horizon {res.horizon_used}" if res.is_sat else ""))
        if res.outcome == "timeout":
            rc = EXIT_TIMEOUT
            break
        if res.outcome == "unsat":
            rc = EXIT_NEGATIVE
            break
        state = state.with_plan(res.plan)
    doc["steps"] = steps
    doc["final_plan"] = formats.plan_to_json(state.plan)
    if args.out and rc == EXIT_OK:
        with open(args.out, "wb") as fh:
            fh.write(formats.serialize_plan(state.plan))
    if rc == EXIT_OK:
        lines += render_plan(state.plan)
    _emit(doc, lines, args.pretty)
    return rc


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _parse_agent_arg(spec: str, index: int) -> AgentSpec:
    parts = spec.split(":")
    if len(parts) < 3 or len(parts) > 5:
        raise SchemaError(f"$.agent[{index}]",
                          f"expected ID:START:GOAL[:WP+WP...[:BATTERY]], got {spec!r}")
    waypoints = frozenset(int(w) for w in parts[3].split("+") if w) if len(parts) > 3 else frozenset()
    battery = int(parts[4]) if len(parts) > 4 else 1
    return AgentSpec(parts[0], int(parts[1]), int(parts[2]), waypoints, battery)


def _cmd_import_ascii(args) -> int:
    grid = formats.parse_ascii_grid(_read(args.grid).decode("utf-8"))
    agents = [_parse_agent_arg(spec, i) for i, spec in enumerate(args.agent or [])]
    battery_max = args.battery_max if args.battery_max is not None else max(
        [a.battery_init for a in agents] + [1])
    instance = Instance(build_graph(grid), agents, battery_max=battery_max,
                        makespan_bound=args.makespan, grid=grid)
    sys.stdout.buffer.write(formats.serialize_instance(instance))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mapf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="find a lexicographically optimal plan")
    sp.add_argument("instance")
    sp.add_argument("--makespan", type=int, default=None, help="override the makespan bound")
    sp.add_argument("--timeout", type=float, default=60.0, help="solve budget in seconds")
    sp.add_argument("--out", default=None, help="write the plan file here")
    sp.add_argument("--stats", action="store_true", help="include wall time in stats")
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=_cmd_solve)

    vp = sub.add_parser("validate", help="check a plan against an instance")
    vp.add_argument("instance")
    vp.add_argument("plan")
    vp.add_argument("--pretty", action="store_true")
    vp.set_defaults(func=_cmd_validate)

    ep = sub.add_parser("explain", help="answer wait/feasibility/optimality queries")
    ep.add_argument("instance")
    ep.add_argument("--why-wait", metavar="AGENT:VERTEX[:T0-T1]")
    ep.add_argument("--plan", help="plan file for --why-wait")
    ep.add_argument("--why-infeasible", action="store_true")
    ep.add_argument("--check-plan", metavar="PLAN")
    ep.add_argument("--why-nonoptimal", metavar="PLAN")
    ep.add_argument("--timeout", type=float, default=60.0)
    ep.add_argument("--delta-max", type=int, default=3)
    ep.add_argument("--pretty", action="store_true")
    ep.set_defaults(func=_cmd_explain)

    dp = sub.add_parser("dynamic", help="execute a plan through an event stream")
    dp.add_argument("instance")
    dp.add_argument("--events", required=True)
    dp.add_argument("--delta-max", type=int, default=3)
    dp.add_argument("--no-fallback", action="store_true", help="disable the replan fallback")
    dp.add_argument("--timeout", type=float, default=60.0)
    dp.add_argument("--out", default=None)
    dp.add_argument("--pretty", action="store_true")
    dp.set_defaults(func=_cmd_dynamic)

    hp = sub.add_parser("serve", help="run the HTTP service")
    hp.add_argument("--host", default="127.0.0.1")
    hp.add_argument("--port", type=int, default=int(os.environ.get("MAPF_PORT", "8533")))
    hp.set_defaults(func=_cmd_serve)

    ip = sub.add_parser("import-ascii", help="convert an ascii grid into an instance file")
    ip.add_argument("grid")
    ip.add_argument("--battery-max", type=int, default=None)
    ip.add_argument("--makespan", type=int, default=0)
    ip.add_argument("--agent", action="append", metavar="ID:START:GOAL[:WP+WP...[:BATTERY]]")
    ip.set_defaults(func=_cmd_import_ascii)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EventRejectedError as e:
        return _fail(e, EXIT_SCHEMA)
    except SchemaError as e:
        return _fail(e, EXIT_SCHEMA)
    except MapfError as e:
        return _fail(e, EXIT_SCHEMA)
    except ValueError as e:
        return _fail(SchemaError("$", str(e)), EXIT_SCHEMA)


if __name__ == "__main__":
    sys.exit(main())
