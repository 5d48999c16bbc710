"""mapfkit: multi-modal multi-agent path finding workbench.

Optimal bounded-horizon solving with batteries, slow edges and waypoints;
plan validation and diagnosis; dynamic plan revision under execution events;
and counterfactual explanations for wait, feasibility and optimality queries.
"""

from .model import (AgentSpec, AgentState, AgentTimeline, AtVertex, DONE, Done, GridSpec,
                    InTransit, Instance, Plan, Violation, ViolationKind, WorldGraph,
                    battery_step, build_graph, edge_duration, trajectory_occupancy)
from .validation import ValidationReport, categorize, validate
from .solver import (NO_RELAX, Relaxation, SolveResult, SolveStats, WaitBan,
                     makespan_lower_bound, single_agent_optimal, solve_decision, solve_optimal)
from .oracle import brute_force_optimal
from .dynamics import (AgentJoin, AgentLeave, DynamicPolicy, DynamicResult, Event,
                       ExecutionState, ObstacleAdd, ObstacleMove, ObstacleRemove, apply_event,
                       begin_execution, resolve_dynamic, revise_and_augment)
from .explain import (AlternativePlan, CheckModifiedPlan, CounterfactualConflict,
                      DelayedItinerary, ExplainConfig, Explanation, FeasibilityConfirmed,
                      InfeasibilityReport, OptimalityGap, Query, RelaxationSuggestion, WhyInfeasible,
                      WhyNonoptimal, WhyWait, check_modified_plan, why_infeasible,
                      why_nonoptimal, why_wait)
from .errors import (CapExceededError, EventRejectedError, InstanceIsFeasibleError, MapfError,
                     NoSuchWaitError, NotAdjacentError, PlanInfeasibleError, SchemaError,
                     UnknownAgentError)

__version__ = "0.1.0"
