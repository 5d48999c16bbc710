import type {GraphDoc, GridDoc, InstanceDoc} from "./types"

export type Point = { x: number, y: number }
export type Layout = {
    positions: Map<number, Point>
    width: number
    height: number
    cell: number
    isGrid: boolean
}

export const CELL = 48

export function gridLayout(grid: GridDoc): Layout {
    const positions = new Map<number, Point>()
    for (let r = 0; r < grid.rows; r++) {
        for (let c = 0; c < grid.cols; c++) {
            const id = r * grid.cols + c + 1
            positions.set(id, {x: (c + 0.5) * CELL, y: (r + 0.5) * CELL})
        }
    }
    return {positions, width: grid.cols * CELL, height: grid.rows * CELL, cell: CELL, isGrid: true}
}

// FNV-1a over the canonical instance JSON: the layout seed must not move
// between reloads or screenshots of the same instance.
export function instanceHash(doc: InstanceDoc): number {
    const text = JSON.stringify(doc, Object.keys(doc).sort())
    let h = 0x811c9dc5
    for (let i = 0; i < text.length; i++) {
        h ^= text.charCodeAt(i)
        h = Math.imul(h, 0x01000193) >>> 0
    }
    return h >>> 0
}

function mulberry32(seed: number): () => number {
    let a = seed >>> 0
    return () => {
        a = (a + 0x6d2b79f5) >>> 0
        let t = Math.imul(a ^ (a >>> 15), 1 | a)
        t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296
    }
}

// Deterministic spring layout: seeded start, fixed iteration count, no
// randomness afterwards, so identical instances render identically.
export function graphLayout(graph: GraphDoc, seed: number): Layout {
    const vs = [...graph.vertices].sort((a, b) => a - b)
    const rand = mulberry32(seed)
    const pos = new Map<number, Point>()
    const span = Math.max(3, Math.ceil(Math.sqrt(vs.length))) * CELL * 1.6
    for (const v of vs) {
        pos.set(v, {x: rand() * span, y: rand() * span})
    }
    const k = CELL * 1.4
    for (let iter = 0; iter < 220; iter++) {
        const force = new Map<number, Point>(vs.map(v => [v, {x: 0, y: 0}]))
        for (let i = 0; i < vs.length; i++) {
            for (let j = i + 1; j < vs.length; j++) {
                const a = pos.get(vs[i])!, b = pos.get(vs[j])!
                const dx = a.x - b.x, dy = a.y - b.y
                const d2 = Math.max(dx * dx + dy * dy, 1)
                const rep = (k * k) / d2
                force.get(vs[i])!.x += dx * rep / Math.sqrt(d2)
                force.get(vs[i])!.y += dy * rep / Math.sqrt(d2)
                force.get(vs[j])!.x -= dx * rep / Math.sqrt(d2)
                force.get(vs[j])!.y -= dy * rep / Math.sqrt(d2)
            }
        }
        for (const e of graph.edges) {
            const a = pos.get(e.u)!, b = pos.get(e.v)!
            const dx = b.x - a.x, dy = b.y - a.y
            const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1)
            const att = (d - k) / d * 0.12
            force.get(e.u)!.x += dx * att
            force.get(e.u)!.y += dy * att
            force.get(e.v)!.x -= dx * att
            force.get(e.v)!.y -= dy * att
        }
        const damp = 0.85 * (1 - iter / 260)
        for (const v of vs) {
            const f = force.get(v)!
            const p = pos.get(v)!
            p.x += Math.max(-CELL, Math.min(CELL, f.x)) * damp
            p.y += Math.max(-CELL, Math.min(CELL, f.y)) * damp
        }
    }
    let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity
    for (const p of pos.values()) {
        minX = Math.min(minX, p.x); maxX = Math.max(maxX, p.x)
        minY = Math.min(minY, p.y); maxY = Math.max(maxY, p.y)
    }
    const pad = CELL
    for (const p of pos.values()) {
        p.x = p.x - minX + pad
        p.y = p.y - minY + pad
    }
    return {positions: pos, width: maxX - minX + 2 * pad, height: maxY - minY + 2 * pad,
            cell: CELL, isGrid: false}
}

export function layoutFor(doc: InstanceDoc): Layout {
    if (doc.grid) return gridLayout(doc.grid)
    return graphLayout(doc.graph!, instanceHash(doc))
}
