import {ApiClient, ApiError} from "./api"
import {layoutFor} from "./layout"
import {addedWaits, completionOf} from "./plan"
import {renderGauges, renderWorld} from "./render"
import {PlaybackClock} from "./playback"
import type {DynamicResultDoc, EventDoc, ExplanationDoc, InstanceDoc, PlanDoc,
             SessionStateDoc} from "./types"

type Mode = "inspect" | "obstacle" | "agent"

// The engineer-facing what-if console. The view is a pure projection of the
// last session state plus the local playback clock; every plan it draws came
// from the service, never from client-side search.
export class WhatIfConsole {
    readonly api: ApiClient
    sid: string | null = null
    state: SessionStateDoc | null = null
    displayedPlan: PlanDoc | null = null
    clock: PlaybackClock
    mode: Mode = "inspect"
    joinDraft: { start?: number, goal?: number } = {}
    private mutationInFlight = false

    constructor(readonly root: HTMLElement, api: ApiClient) {
        this.api = api
        this.root.innerHTML = TEMPLATE
        this.clock = new PlaybackClock(
            () => this.renderWorldOnly(),
            () => this.displayedPlan?.makespan ?? 0)
        this.el("btn-load").addEventListener("click", () => {
            const text = (this.el("instance-input") as HTMLTextAreaElement).value
            void this.loadInstance(text)
        })
        this.el("btn-solve").addEventListener("click", () => void this.solve())
        this.el("btn-play").addEventListener("click", () => this.clock.toggle())
        this.el("scrubber").addEventListener("input", () => {
            this.clock.setTime(Number((this.el("scrubber") as HTMLInputElement).value))
        })
        this.el("btn-why-no-solution").addEventListener("click", () => void this.whyNoSolution())
        this.el("btn-check-plan").addEventListener("click", () => void this.checkPlan())
        this.el("btn-why-nonoptimal").addEventListener("click", () => void this.whyNonoptimal())
        this.el("btn-ask-wait").addEventListener("click", () => void this.askPrefilledWait())
        this.el("btn-mode-inspect").addEventListener("click", () => this.setMode("inspect"))
        this.el("btn-mode-obstacle").addEventListener("click", () => this.setMode("obstacle"))
        this.el("btn-mode-agent").addEventListener("click", () => this.setMode("agent"))
        this.el("btn-submit-join").addEventListener("click", () => void this.submitJoin())
    }

    el(id: string): HTMLElement {
        return this.root.querySelector(`#${id}`) as HTMLElement
    }

    private setStatus(text: string): void {
        this.el("status").textContent = text
    }

    private showError(err: unknown): void {
        const box = this.el("error-box")
        if (err instanceof ApiError) {
            box.textContent = `[${err.code}] ${err.message}`
        } else {
            box.textContent = String(err)
        }
        box.classList.remove("hidden")
    }

    private clearError(): void {
        const box = this.el("error-box")
        box.textContent = ""
        box.classList.add("hidden")
    }

    async loadInstance(text: string): Promise<void> {
        this.clearError()
        try {
            const doc = JSON.parse(text) as InstanceDoc
            this.sid = await this.api.createSession(doc)
            window.location.hash = this.sid
            await this.refresh()
            this.setStatus(`session ${this.sid}`)
        } catch (err) {
            this.showError(err)
        }
    }

    // Reload path: rebuilding the console against an existing session id must
    // reproduce the same rendering from server state alone.
    async attach(sid: string): Promise<void> {
        this.sid = sid
        await this.refresh()
        this.setStatus(`session ${this.sid}`)
    }

    async refresh(): Promise<void> {
        if (!this.sid) return
        this.state = await this.api.getState(this.sid)
        this.displayedPlan = this.state.plan ?? null
        this.renderAll()
    }

    private async mutate<T>(run: () => Promise<T>): Promise<T | null> {
        if (this.mutationInFlight) {
            this.showError(new ApiError(409, "client_busy", "another mutation is in flight"))
            return null
        }
        this.mutationInFlight = true
        this.clearError()
        try {
            return await run()
        } catch (err) {
            this.showError(err)
            return null
        } finally {
            this.mutationInFlight = false
        }
    }

    async solve(): Promise<void> {
        if (!this.sid) return
        const res = await this.mutate(() => this.api.solve(this.sid!))
        if (!res) return
        this.setStatus(res.outcome === "sat" ? `solved: makespan ${res.plan!.makespan}`
                                             : `solve: ${res.outcome}`)
        await this.refresh()
    }

    // --- queries -----------------------------------------------------------

    prefillWait(agent: string, vertex: number, from: number, to: number): void {
        this.el("wait-agent").textContent = agent
        this.el("wait-vertex").textContent = String(vertex)
        this.el("wait-window").textContent = `${from}–${to}`
        const panel = this.el("wait-prefill")
        panel.dataset.agent = agent
        panel.dataset.vertex = String(vertex)
        panel.dataset.from = String(from)
        panel.dataset.to = String(to)
        panel.classList.remove("hidden")
    }

    async askPrefilledWait(): Promise<void> {
        const panel = this.el("wait-prefill")
        if (!this.sid || panel.dataset.agent === undefined) return
        try {
            this.clearError()
            const exp = await this.api.whyWait(this.sid, panel.dataset.agent!,
                                               Number(panel.dataset.vertex))
            this.addCard(exp)
        } catch (err) {
            this.showError(err)
        }
    }

    async whyNoSolution(): Promise<void> {
        if (!this.sid) return
        try {
            this.clearError()
            const body = await this.api.whyInfeasible(this.sid)
            if (!body.explanations.length) {
                this.addTextCard(body.message ?? "no single-change relaxation explains it")
            }
            for (const exp of body.explanations) this.addCard(exp)
        } catch (err) {
            this.showError(err)
        }
    }

    async checkPlan(): Promise<void> {
        if (!this.sid || !this.displayedPlan) return
        try {
            this.clearError()
            this.addCard(await this.api.checkPlan(this.sid, this.displayedPlan))
        } catch (err) {
            this.showError(err)
        }
    }

    async whyNonoptimal(): Promise<void> {
        if (!this.sid || !this.displayedPlan) return
        try {
            this.clearError()
            this.addCard(await this.api.whyNonoptimal(this.sid, this.displayedPlan))
        } catch (err) {
            this.showError(err)
        }
    }

    addTextCard(text: string): void {
        const card = document.createElement("div")
        card.className = "card"
        card.textContent = text
        this.el("cards").prepend(card)
    }

    addCard(exp: ExplanationDoc): void {
        const card = document.createElement("div")
        card.className = `card card-${exp.kind}`
        const msg = document.createElement("p")
        msg.textContent = exp.message
        card.appendChild(msg)
        const altPlan = exp.plan ?? exp.optimal_plan ?? exp.better_plans?.[0]
        if (altPlan) {
            const btn = document.createElement("button")
            btn.textContent = "apply alternative plan"
            btn.className = "apply-alternative"
            btn.addEventListener("click", () => this.applyAlternative(altPlan))
            card.appendChild(btn)
        }
        if (exp.kind === "relaxation_suggestion" && exp.relaxation) {
            const obstacles = (exp.relaxation as { ignored_obstacles?: number[] }).ignored_obstacles
            if (obstacles && obstacles.length === 1) {
                const btn = document.createElement("button")
                btn.textContent = `compose obstacle removal at ${obstacles[0]}`
                btn.className = "compose-removal"
                btn.addEventListener("click", () => {
                    this.setMode("obstacle")
                    this.el("event-note").textContent =
                        `click cell ${obstacles[0]} to remove the obstacle`
                })
                card.appendChild(btn)
            }
        }
        this.el("cards").prepend(card)
    }

    // Swap the displayed plan for a server-provided alternative. No re-solve:
    // the server already validated every plan it returned.
    applyAlternative(plan: PlanDoc): void {
        this.displayedPlan = plan
        this.renderAll()
        this.setStatus("showing alternative plan")
    }

    // --- events ------------------------------------------------------------

    setMode(mode: Mode): void {
        this.mode = mode
        this.joinDraft = {}
        this.el("event-note").textContent =
            mode === "obstacle" ? "click a cell to toggle an obstacle"
                : mode === "agent" ? "click the start cell for the joining agent"
                : ""
        for (const m of ["inspect", "obstacle", "agent"]) {
            this.el(`btn-mode-${m}`).classList.toggle("active", m === mode)
        }
    }

    private eventTime(): number {
        const t = Math.floor(this.clock.time)
        return Math.max(this.state?.t_now ?? 0, t)
    }

    async onCellClick(vertex: number): Promise<void> {
        if (this.mode === "obstacle") {
            const obstacles = new Set(this.state?.instance.grid?.obstacles
                ?? this.state?.instance.graph?.obstacles ?? [])
            const kind = obstacles.has(vertex) ? "obstacle_remove" : "obstacle_add"
            await this.submitEvent({kind, time: this.eventTime(), vertex} as EventDoc)
            return
        }
        if (this.mode === "agent") {
            if (this.joinDraft.start === undefined) {
                this.joinDraft.start = vertex
                this.el("event-note").textContent =
                    `start ${vertex}; now click the goal cell`
            } else {
                this.joinDraft.goal = vertex
                this.el("event-note").textContent =
                    `start ${this.joinDraft.start} -> goal ${vertex}; name it and submit`
                this.el("join-form").classList.remove("hidden")
            }
        }
    }

    async submitJoin(): Promise<void> {
        if (this.joinDraft.start === undefined || this.joinDraft.goal === undefined) return
        const id = (this.el("join-id") as HTMLInputElement).value || "new"
        const battery = Number((this.el("join-battery") as HTMLInputElement).value)
            || this.state!.instance.battery_max
        await this.submitEvent({
            kind: "agent_join", time: this.eventTime(),
            agent: {id, start: this.joinDraft.start, goal: this.joinDraft.goal,
                    waypoints: [], battery},
        })
        this.el("join-form").classList.add("hidden")
        this.joinDraft = {}
    }

    async submitEvent(event: EventDoc): Promise<void> {
        if (!this.sid) return
        const before = this.displayedPlan
        const res = await this.mutate(() => this.api.postEvent(this.sid!, event))
        if (!res) return
        this.renderDiff(before, res)
        await this.refresh()
    }

    renderDiff(before: PlanDoc | null, res: DynamicResultDoc): void {
        const box = this.el("diff")
        box.textContent = ""
        const title = document.createElement("p")
        if (res.outcome !== "sat" || !res.plan) {
            title.textContent = `resolve: ${res.outcome}`
            box.appendChild(title)
            return
        }
        const deltaH = before ? res.plan.makespan - before.makespan : 0
        const horizon = deltaH === 0 ? "horizon unchanged"
            : `${deltaH > 0 ? "+" : ""}${deltaH} horizon`
        title.textContent = `${res.method} at horizon ${res.horizon_used}: ${horizon}`
        box.appendChild(title)
        const list = document.createElement("ul")
        if (before) {
            const waits = addedWaits(before, res.plan)
            let inserted = 0
            for (const delta of waits.values()) if (delta > 0) inserted += delta
            if (inserted > 0) {
                const li = document.createElement("li")
                li.textContent = `${inserted} waits inserted (${[...waits.keys()].sort().join(", ")})`
                list.appendChild(li)
            }
            const newcomers = Object.keys(res.plan.agents)
                .filter(aid => !(aid in before.agents)).sort()
            for (const aid of newcomers) {
                const li = document.createElement("li")
                li.textContent = `${aid} path added`
                list.appendChild(li)
            }
            const unchanged = Object.keys(before.agents).filter(aid => {
                const a = before.agents[aid], b = res.plan!.agents[aid]
                return b && JSON.stringify(a.route) === JSON.stringify(b.route)
            }).sort()
            if (unchanged.length) {
                const li = document.createElement("li")
                li.textContent = `routes unchanged: ${unchanged.join(", ")}`
                list.appendChild(li)
            }
        }
        box.appendChild(list)
    }

    // --- rendering ---------------------------------------------------------

    renderAll(): void {
        const scrubber = this.el("scrubber") as HTMLInputElement
        scrubber.max = String(this.displayedPlan?.makespan ?? 0)
        this.renderWorldOnly()
        this.renderHistory()
        const hasPlan = this.displayedPlan !== null
        this.el("empty-state").classList.toggle("hidden", hasPlan || !this.state)
    }

    renderWorldOnly(): void {
        if (!this.state) return
        const layout = layoutFor(this.state.instance)
        const svg = this.el("world") as unknown as SVGSVGElement
        renderWorld(this.state.instance, layout, this.displayedPlan, this.clock.time, {
            svg,
            onCellClick: v => void this.onCellClick(v),
            onWaitClick: (agent, vertex, from, to) => this.prefillWait(agent, vertex, from, to),
        })
        renderGauges(this.el("gauges"), this.state.instance, this.displayedPlan,
                     this.clock.time)
        this.el("clock-label").textContent = `t = ${this.clock.time.toFixed(1)}`
        const scrubber = this.el("scrubber") as HTMLInputElement
        scrubber.value = String(this.clock.time)
    }

    renderHistory(): void {
        const list = this.el("history-list")
        list.textContent = ""
        for (const item of this.state?.history ?? []) {
            const li = document.createElement("li")
            li.textContent = item.request.op
            list.appendChild(li)
        }
    }
}

const TEMPLATE = `
<div class="console">
  <header>
    <textarea id="instance-input" rows="3" placeholder="paste an instance JSON"></textarea>
    <button id="btn-load">load instance</button>
    <button id="btn-solve">solve</button>
    <span id="status"></span>
    <div id="error-box" class="error hidden"></div>
  </header>
  <main>
    <section class="world-pane">
      <div id="empty-state">no plan yet: load an instance and solve</div>
      <svg id="world" xmlns="http://www.w3.org/2000/svg"></svg>
      <div class="playback">
        <button id="btn-play">play/pause</button>
        <input id="scrubber" type="range" min="0" max="0" step="0.1" value="0">
        <span id="clock-label">t = 0.0</span>
      </div>
      <div id="gauges"></div>
    </section>
    <aside class="side-pane">
      <section class="queries">
        <h3>queries</h3>
        <div id="wait-prefill" class="hidden">
          why does <b id="wait-agent"></b> wait at cell <b id="wait-vertex"></b>
          (t <span id="wait-window"></span>)?
          <button id="btn-ask-wait">ask</button>
        </div>
        <button id="btn-why-no-solution">why no solution?</button>
        <button id="btn-check-plan">check displayed plan</button>
        <button id="btn-why-nonoptimal">why non-optimal?</button>
        <div id="cards"></div>
      </section>
      <section class="events">
        <h3>events</h3>
        <button id="btn-mode-inspect" class="active">inspect</button>
        <button id="btn-mode-obstacle">toggle obstacles</button>
        <button id="btn-mode-agent">place agent</button>
        <p id="event-note"></p>
        <div id="join-form" class="hidden">
          id <input id="join-id" size="4" value="new">
          battery <input id="join-battery" size="4">
          <button id="btn-submit-join">join at current time</button>
        </div>
        <div id="diff"></div>
      </section>
      <section class="history">
        <h3>history</h3>
        <ol id="history-list"></ol>
      </section>
    </aside>
  </main>
</div>`
