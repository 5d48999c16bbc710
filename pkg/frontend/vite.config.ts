import {defineConfig} from "vitest/config"

export default defineConfig({
    build: {outDir: "dist"},
    test: {
        environment: "jsdom",
        testTimeout: 30000,
        hookTimeout: 60000,
    },
})
