"""Agreement sweep: the optimizing solver versus the brute-force reference."""
import pytest

from mapfkit import brute_force_optimal, solve_optimal, validate
from mapfkit.randgen import random_instance

SEEDS = list(range(1, 51))


@pytest.mark.parametrize("seed", SEEDS)
def test_solver_matches_oracle(seed):
    instance = random_instance(seed)
    fast = solve_optimal(instance)
    slow = brute_force_optimal(instance)
    assert fast.outcome == slow.outcome, f"seed {seed}"
    if fast.is_sat:
        lhs = fast.plan.objective_vector(instance.objectives)
        rhs = slow.plan.objective_vector(instance.objectives)
        assert lhs == rhs, f"seed {seed}: solver {lhs} vs oracle {rhs}"
        assert validate(instance, fast.plan).feasible
        assert validate(instance, slow.plan).feasible
