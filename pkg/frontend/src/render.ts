import type {InstanceDoc, PlanDoc} from "./types"
import type {Layout, Point} from "./layout"
import {batteryAt, completionOf, poseAt, waitSegments} from "./plan"

const SVG_NS = "http://www.w3.org/2000/svg"

export const AGENT_COLORS = ["#2563eb", "#16a34a", "#d97706", "#dc2626", "#7c3aed",
                             "#0891b2", "#be185d", "#4d7c0f"]

export function colorFor(index: number): string {
    return AGENT_COLORS[index % AGENT_COLORS.length]
}

function el(name: string, attrs: Record<string, string | number>, text?: string): SVGElement {
    const node = document.createElementNS(SVG_NS, name) as SVGElement
    for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v))
    if (text !== undefined) node.textContent = text
    return node
}

function starPoints(cx: number, cy: number, r: number): string {
    const pts: string[] = []
    for (let i = 0; i < 10; i++) {
        const rad = i % 2 === 0 ? r : r * 0.45
        const a = -Math.PI / 2 + (i * Math.PI) / 5
        pts.push(`${(cx + rad * Math.cos(a)).toFixed(1)},${(cy + rad * Math.sin(a)).toFixed(1)}`)
    }
    return pts.join(" ")
}

export type WorldView = {
    svg: SVGSVGElement
    onCellClick?: (vertex: number) => void
    onWaitClick?: (agent: string, vertex: number, from: number, to: number) => void
}

// One pure projection: world + plan + clock in, SVG out. No solver logic.
export function renderWorld(instance: InstanceDoc, layout: Layout, plan: PlanDoc | null,
                            clock: number, view: WorldView): SVGSVGElement {
    const svg = view.svg
    svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`)
    svg.setAttribute("width", String(layout.width))
    svg.setAttribute("height", String(layout.height))
    while (svg.firstChild) svg.removeChild(svg.firstChild)

    const obstacles = new Set(instance.grid?.obstacles ?? instance.graph?.obstacles ?? [])
    const charging = new Set(instance.grid?.charging ?? instance.graph?.charging ?? [])
    const slow = new Set(instance.grid?.slow_cells ?? [])
    const half = layout.cell / 2

    if (layout.isGrid) {
        for (const [v, p] of layout.positions) {
            const cls = obstacles.has(v) ? "cell obstacle"
                : charging.has(v) ? "cell charging"
                : slow.has(v) ? "cell slow" : "cell"
            const rect = el("rect", {
                x: p.x - half, y: p.y - half, width: layout.cell, height: layout.cell,
                class: cls, "data-vertex": v,
            })
            if (view.onCellClick) rect.addEventListener("click", () => view.onCellClick!(v))
            svg.appendChild(rect)
            svg.appendChild(el("text", {x: p.x - half + 3, y: p.y - half + 11,
                                        class: "cell-label"}, String(v)))
        }
    } else {
        for (const e of instance.graph!.edges) {
            const a = layout.positions.get(e.u)!, b = layout.positions.get(e.v)!
            svg.appendChild(el("line", {
                x1: a.x, y1: a.y, x2: b.x, y2: b.y,
                class: e.duration > 1 ? "edge slow" : "edge",
            }))
        }
        for (const [v, p] of layout.positions) {
            const cls = obstacles.has(v) ? "node obstacle"
                : charging.has(v) ? "node charging" : "node"
            const c = el("circle", {cx: p.x, cy: p.y, r: half * 0.55, class: cls,
                                    "data-vertex": v})
            if (view.onCellClick) c.addEventListener("click", () => view.onCellClick!(v))
            svg.appendChild(c)
            svg.appendChild(el("text", {x: p.x - 4, y: p.y - half * 0.7,
                                        class: "cell-label"}, String(v)))
        }
    }

    instance.agents.forEach((agent, idx) => {
        for (const w of agent.waypoints) {
            const p = layout.positions.get(w)
            if (!p) continue
            svg.appendChild(el("polygon", {
                points: starPoints(p.x, p.y, half * 0.42),
                class: "waypoint", fill: colorFor(idx), "data-waypoint-of": agent.id,
            }))
        }
    })

    if (plan) {
        instance.agents.forEach((agent, idx) => {
            const tl = plan.agents[agent.id]
            if (!tl) return
            const pts: Point[] = []
            for (const entry of tl.route) {
                if (entry === "done") break
                if ("at" in entry) {
                    const p = layout.positions.get(entry.at)!
                    pts.push(p)
                }
            }
            svg.appendChild(el("polyline", {
                points: pts.map(p => `${p.x},${p.y}`).join(" "),
                class: "trajectory", stroke: colorFor(idx), "data-trajectory": agent.id,
            }))
        })

        for (const seg of waitSegments(plan)) {
            const p = layout.positions.get(seg.vertex)
            if (!p) continue
            const idx = instance.agents.findIndex(a => a.id === seg.agent)
            const marker = el("circle", {
                cx: p.x, cy: p.y, r: half * 0.8, class: "wait-marker",
                stroke: colorFor(idx),
                "data-wait-agent": seg.agent, "data-wait-vertex": seg.vertex,
                "data-wait-from": seg.from, "data-wait-to": seg.to,
            })
            if (view.onWaitClick) {
                marker.addEventListener("click", () =>
                    view.onWaitClick!(seg.agent, seg.vertex, seg.from, seg.to))
            }
            svg.appendChild(marker)
        }

        instance.agents.forEach((agent, idx) => {
            const tl = plan.agents[agent.id]
            if (!tl) return
            const pose = poseAt(tl, clock)
            if (pose.kind === "absent") return
            let at: Point
            if (pose.kind === "at") {
                at = layout.positions.get(pose.v)!
            } else {
                const a = layout.positions.get(pose.u)!, b = layout.positions.get(pose.v)!
                at = {x: a.x + (b.x - a.x) * pose.frac, y: a.y + (b.y - a.y) * pose.frac}
            }
            const done = clock >= completionOf(tl) && pose.kind === "at"
            svg.appendChild(el("circle", {
                cx: at.x, cy: at.y, r: half * 0.58, fill: colorFor(idx),
                class: done ? "agent done" : "agent", "data-agent": agent.id,
            }))
            svg.appendChild(el("text", {x: at.x - 8, y: at.y + 4, class: "agent-label"},
                               agent.id))
        })
    }
    return svg
}

// Battery gauges: one bar per agent at the floored clock value.
export function renderGauges(container: HTMLElement, instance: InstanceDoc,
                             plan: PlanDoc | null, clock: number): void {
    container.textContent = ""
    if (!plan) return
    instance.agents.forEach((agent, idx) => {
        const tl = plan.agents[agent.id]
        if (!tl) return
        const level = batteryAt(tl, clock)
        const row = document.createElement("div")
        row.className = "gauge-row"
        row.dataset.agent = agent.id
        const label = document.createElement("span")
        label.textContent = level === null ? `${agent.id} –` : `${agent.id} ${level}/${instance.battery_max}`
        label.className = "gauge-label"
        const bar = document.createElement("div")
        bar.className = "gauge-bar"
        const fill = document.createElement("div")
        fill.className = "gauge-fill"
        const frac = level === null ? 0 : level / instance.battery_max
        fill.style.width = `${Math.round(frac * 100)}%`
        fill.style.background = colorFor(idx)
        fill.dataset.level = level === null ? "" : String(level)
        bar.appendChild(fill)
        row.appendChild(label)
        row.appendChild(bar)
        container.appendChild(row)
    })
}
