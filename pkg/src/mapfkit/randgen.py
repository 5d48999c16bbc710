"""Seeded random instance generation for agreement suites and benchmarks."""
from __future__ import annotations

import random

from .model import AgentSpec, GridSpec, Instance, build_graph


def random_instance(seed: int, rows: int = 4, cols: int = 4, n_agents: int = 2,
                    obstacle_density: float = 0.2, n_charging: int = 1,
                    battery_max: int = 8, makespan_bound: int = 12,
                    max_waypoints: int = 1) -> Instance:
    """One reproducible grid instance; identical seeds give identical instances."""
    rng = random.Random(seed)
    n = rows * cols
    cells = list(range(1, n + 1))
    n_obstacles = round(obstacle_density * n)
    need = n_agents * 2  # starts and goals must fit on free cells
    n_obstacles = min(n_obstacles, n - need - n_charging)
    obstacles = set(rng.sample(cells, n_obstacles)) if n_obstacles > 0 else set()
    free = [c for c in cells if c not in obstacles]
    charging = set(rng.sample(free, min(n_charging, len(free))))

    starts = rng.sample(free, n_agents)
    goals = rng.sample(free, n_agents)
    agents = []
    for i in range(n_agents):
        waypoints = frozenset()
        if max_waypoints and rng.random() < 0.5:
            waypoints = frozenset(rng.sample(free, min(max_waypoints, len(free))))
        agents.append(AgentSpec(f"a{i + 1}", starts[i], goals[i], waypoints,
                                battery_init=rng.randint(max(battery_max - 4, 1), battery_max)))
    grid = GridSpec(rows=rows, cols=cols, obstacles=frozenset(obstacles),
                    charging=frozenset(charging))
    return Instance(build_graph(grid), agents, battery_max=battery_max,
                    makespan_bound=makespan_bound, grid=grid)
