import type {PlanDoc, RouteEntry, TimelineDoc} from "./types"

export type AgentPose =
    | { kind: "at", v: number }
    | { kind: "transit", u: number, v: number, frac: number }
    | { kind: "absent" }

function entryAt(tl: TimelineDoc, t: number): RouteEntry | null {
    const birth = tl.joined_at ?? 0
    if (t < birth) return null
    const i = t - birth
    return i < tl.route.length ? tl.route[i] : tl.route[tl.route.length - 1]
}

export function completionOf(tl: TimelineDoc): number {
    const birth = tl.joined_at ?? 0
    let last = birth
    tl.route.forEach((e, i) => {
        if (e !== "done") last = birth + i
    })
    return last
}

export function anchorVertex(tl: TimelineDoc): number {
    for (let i = tl.route.length - 1; i >= 0; i--) {
        const e = tl.route[i]
        if (e !== "done" && "at" in e) return e.at
    }
    return NaN
}

// Pose at a fractional clock value; agents are drawn mid-edge while in
// transit, linearly interpolated between the timestep grid points.
export function poseAt(tl: TimelineDoc, clock: number): AgentPose {
    const birth = tl.joined_at ?? 0
    if (clock < birth) return {kind: "absent"}
    const t0 = Math.floor(clock)
    const frac = clock - t0
    const here = entryAt(tl, t0)
    if (here === null) return {kind: "absent"}
    const next = entryAt(tl, t0 + 1)
    const vertexOf = (e: RouteEntry): number | null =>
        e === "done" ? anchorVertex(tl) : ("at" in e ? e.at : null)

    if (here !== "done" && "transit" in here) {
        const d = durationGuess(tl, t0)
        const progress = (here.step + frac) / d
        return {kind: "transit", u: here.transit[0], v: here.transit[1],
                frac: Math.min(progress, 1)}
    }
    const hereV = vertexOf(here)!
    if (frac === 0 || next === null) return {kind: "at", v: hereV}
    if (next !== "done" && "transit" in next) {
        const d = durationGuess(tl, t0 + 1)
        return {kind: "transit", u: next.transit[0], v: next.transit[1],
                frac: (next.step - 1 + frac) / d}
    }
    const nextV = vertexOf(next)
    if (nextV === null || nextV === hereV) return {kind: "at", v: hereV}
    return {kind: "transit", u: hereV, v: nextV, frac}
}

// Edge duration reconstructed from the number of consecutive transit entries.
function durationGuess(tl: TimelineDoc, t: number): number {
    const birth = tl.joined_at ?? 0
    let i = t - birth
    while (i > 0) {
        const e = tl.route[i - 1]
        if (e !== "done" && "transit" in e) i--
        else break
    }
    let steps = 0
    while (i < tl.route.length) {
        const e = tl.route[i]
        if (e !== "done" && "transit" in e) { steps++; i++ }
        else break
    }
    return steps + 1
}

export type WaitSegment = { agent: string, vertex: number, from: number, to: number }

// Maximal runs of consecutive at-vertex repeats before completion: the
// clickable "why does it wait here" targets.
export function waitSegments(plan: PlanDoc): WaitSegment[] {
    const out: WaitSegment[] = []
    for (const [agent, tl] of Object.entries(plan.agents)) {
        const birth = tl.joined_at ?? 0
        const completion = completionOf(tl)
        let runStart: number | null = null
        let runVertex = NaN
        for (let t = birth; t < completion; t++) {
            const a = tl.route[t - birth]
            const b = tl.route[t + 1 - birth]
            const waiting = a !== "done" && b !== "done" && "at" in a && "at" in b
                && a.at === b.at
            if (waiting && runStart === null) {
                runStart = t
                runVertex = (a as { at: number }).at
            }
            if (!waiting && runStart !== null) {
                out.push({agent, vertex: runVertex, from: runStart, to: t + 1})
                runStart = null
            }
        }
        if (runStart !== null) out.push({agent, vertex: runVertex, from: runStart, to: completion})
    }
    return out
}

export function batteryAt(tl: TimelineDoc, clock: number): number | null {
    const birth = tl.joined_at ?? 0
    const i = Math.min(Math.floor(clock), birth + tl.battery.length - 1) - birth
    return i >= 0 ? tl.battery[i] : null
}

// Per-agent count of wait steps added relative to another plan (diff view).
export function addedWaits(before: PlanDoc, after: PlanDoc): Map<string, number> {
    const countWaits = (tl: TimelineDoc): number => {
        let n = 0
        const completion = completionOf(tl)
        const birth = tl.joined_at ?? 0
        for (let i = 0; i + 1 <= completion - birth; i++) {
            const a = tl.route[i], b = tl.route[i + 1]
            if (a !== "done" && b !== "done" && "at" in a && "at" in b && a.at === b.at) n++
        }
        return n
    }
    const out = new Map<string, number>()
    for (const [aid, tl] of Object.entries(after.agents)) {
        const old = before.agents[aid]
        const delta = countWaits(tl) - (old ? countWaits(old) : 0)
        if (delta !== 0) out.set(aid, delta)
    }
    return out
}
