import {ApiClient} from "./api"
import {WhatIfConsole} from "./app"

const base = (import.meta as any).env?.VITE_API_BASE ?? "http://127.0.0.1:8533"
const root = document.getElementById("app")!
const console_ = new WhatIfConsole(root, new ApiClient(base))
const sid = window.location.hash.replace(/^#/, "")
if (sid) void console_.attach(sid)
