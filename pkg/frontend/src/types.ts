// Wire types mirroring the service's JSON schemas.

export type GridDoc = {
    rows: number
    cols: number
    obstacles: number[]
    slow_cells: number[]
    slow_duration: number
    charging: number[]
}

export type GraphDoc = {
    vertices: number[]
    edges: { u: number, v: number, duration: number }[]
    obstacles: number[]
    charging: number[]
}

export type AgentDoc = {
    id: string
    start: number
    goal: number
    waypoints: number[]
    battery: number
}

export type InstanceDoc = {
    grid?: GridDoc
    graph?: GraphDoc
    battery_max: number
    agents: AgentDoc[]
    makespan_bound: number
    objectives: string[]
}

export type RouteEntry = { at: number } | { transit: [number, number], step: number } | "done"

export type TimelineDoc = {
    route: RouteEntry[]
    battery: number[]
    charge_times: number[]
    joined_at?: number
}

export type PlanDoc = {
    makespan: number
    agents: { [id: string]: TimelineDoc }
}

export type ViolationDoc = {
    kind: string
    agents: string[]
    where: number | [number, number] | null
    time: number | null
}

export type SolveResultDoc = {
    outcome: "sat" | "unsat" | "timeout"
    plan?: PlanDoc
    stats: { nodes_expanded: number, horizon: number | null }
}

export type DynamicResultDoc = {
    outcome: "sat" | "unsat" | "timeout"
    method: "revise_augment" | "replan" | null
    horizon_used: number | null
    plan?: PlanDoc
}

export type ExplanationDoc = {
    kind: string
    message: string
    plan?: PlanDoc
    delay?: number
    violation?: ViolationDoc
    counterfactual_plan?: PlanDoc
    relaxation?: Record<string, unknown>
    witness_plan?: PlanDoc
    first_violation?: ViolationDoc
    time_delta?: number
    charge_delta?: number
    optimal_plan?: PlanDoc
    better_plans?: PlanDoc[]
    categories?: string[]
    violations?: ViolationDoc[]
}

export type QueryListDoc = { explanations: ExplanationDoc[], message?: string }

export type EventDoc =
    | { kind: "agent_join", time: number, agent: AgentDoc }
    | { kind: "agent_leave", time: number, id: string }
    | { kind: "obstacle_add", time: number, vertex: number }
    | { kind: "obstacle_remove", time: number, vertex: number }
    | { kind: "obstacle_move", time: number, from: number, to: number }

export type SessionStateDoc = {
    session_id: string
    instance: InstanceDoc
    plan?: PlanDoc
    t_now: number
    stale: boolean
    pending: boolean
    history: { request: { op: string, body: unknown }, response: unknown }[]
}
