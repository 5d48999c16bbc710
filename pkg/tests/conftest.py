import pathlib

import pytest

from mapfkit import presets

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"
GOLDEN = pathlib.Path(__file__).parent / "golden"


@pytest.fixture
def warehouse():
    return presets.warehouse_3x10()


@pytest.fixture
def warehouse_plan():
    return presets.warehouse_3x10_plan()


@pytest.fixture
def crossing():
    return presets.crossing_3x3()


@pytest.fixture
def wait_query():
    return presets.wait_query_world()


@pytest.fixture
def plan1():
    return presets.wait_query_plan_initial_wait()


@pytest.fixture
def plan2():
    return presets.wait_query_plan_no_wait()


@pytest.fixture
def blocked_swap():
    return presets.blocked_swap_3x3()


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def golden_path(name: str) -> pathlib.Path:
    return GOLDEN / name
