import type {DynamicResultDoc, EventDoc, ExplanationDoc, InstanceDoc, PlanDoc, QueryListDoc,
             SessionStateDoc, SolveResultDoc} from "./types"

export class ApiError extends Error {
    constructor(readonly status: number, readonly code: string, message: string) {
        super(message)
    }
}

async function unwrap<T>(res: Response): Promise<T> {
    const body = await res.json().catch(() => ({}))
    if (!res.ok) {
        const err = (body as any).error ?? {}
        throw new ApiError(res.status, err.code ?? "error", err.message ?? res.statusText)
    }
    return body as T
}

export class ApiClient {
    constructor(readonly base: string) {}

    private post<T>(path: string, body: unknown): Promise<T> {
        return fetch(this.base + path, {
            method: "POST",
            headers: {"content-type": "application/json"},
            body: JSON.stringify(body),
        }).then(res => unwrap<T>(res))
    }

    async createSession(instance: InstanceDoc): Promise<string> {
        const body = await this.post<{ session_id: string }>("/sessions", {instance})
        return body.session_id
    }

    solve(sid: string, timeout?: number): Promise<SolveResultDoc> {
        return this.post(`/sessions/${sid}/solve`, timeout === undefined ? {} : {timeout})
    }

    getState(sid: string): Promise<SessionStateDoc> {
        return fetch(`${this.base}/sessions/${sid}`).then(res => unwrap<SessionStateDoc>(res))
    }

    postEvent(sid: string, event: EventDoc): Promise<DynamicResultDoc> {
        return this.post(`/sessions/${sid}/event`, {event})
    }

    whyWait(sid: string, agent: string, vertex: number,
            window?: [number, number]): Promise<ExplanationDoc> {
        return this.post(`/sessions/${sid}/query`,
                         {query: {kind: "why_wait", agent, vertex, window: window ?? null}})
    }

    whyInfeasible(sid: string): Promise<QueryListDoc> {
        return this.post(`/sessions/${sid}/query`, {query: {kind: "why_infeasible"}})
    }

    checkPlan(sid: string, plan: PlanDoc): Promise<ExplanationDoc> {
        return this.post(`/sessions/${sid}/query`, {query: {kind: "check_plan", plan}})
    }

    whyNonoptimal(sid: string, plan: PlanDoc): Promise<ExplanationDoc> {
        return this.post(`/sessions/${sid}/query`, {query: {kind: "why_nonoptimal", plan}})
    }
}
