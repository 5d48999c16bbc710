// Local playback clock: the only client-side state next to the session view.

export class PlaybackClock {
    time = 0
    playing = false
    private timer: ReturnType<typeof setInterval> | null = null

    constructor(private onTick: (t: number) => void,
                private maxTime: () => number,
                private stepsPerSecond = 2) {}

    setTime(t: number): void {
        this.time = Math.max(0, Math.min(t, this.maxTime()))
        this.onTick(this.time)
    }

    play(): void {
        if (this.playing) return
        this.playing = true
        const dt = 1 / (this.stepsPerSecond * 10)
        this.timer = setInterval(() => {
            if (this.time >= this.maxTime()) {
                this.pause()
                return
            }
            this.setTime(this.time + dt)
        }, 100 / this.stepsPerSecond)
    }

    pause(): void {
        this.playing = false
        if (this.timer !== null) {
            clearInterval(this.timer)
            this.timer = null
        }
    }

    toggle(): void {
        this.playing ? this.pause() : this.play()
    }
}
