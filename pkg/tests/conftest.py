import dataclasses
import json
from pathlib import Path

import pytest

import prpmi
from prpmi.instance import HOURS, Instance

FIXTURES = Path(__file__).parent / "fixtures"


def _constant_demand(instance, kg_per_hour):
    rows = tuple(tuple(float(kg_per_hour) for _ in range(HOURS)) for _ in range(instance.horizon))
    destinations = tuple(dataclasses.replace(d, hourly_demand=rows) for d in instance.destinations)
    return dataclasses.replace(instance, destinations=destinations)


@pytest.fixture(scope="module")
def tiny_instance():
    """Fixture to generate one source, two destinations, three storages and two days."""
    return prpmi.generate_small_instance(seed=1)


@pytest.fixture(scope="module")
def tiny_teg(tiny_instance):
    """Fixture to build the time-expanded graph of the tiny instance once."""
    return prpmi.build_teg(tiny_instance)


@pytest.fixture(scope="module")
def one_day_instance():
    """Fixture to generate the smallest instance worth solving exactly."""
    return prpmi.generate_small_instance(seed=3, horizon=1)


@pytest.fixture(scope="module")
def zero_demand_instance(tiny_instance):
    """Fixture to copy the tiny instance with no demand at all."""
    return _constant_demand(tiny_instance, 0.0)


@pytest.fixture(scope="module")
def greedy_fixture():
    """Fixture to load the hand-traced greedy run."""
    with open(FIXTURES / "greedy_trace.json", encoding="utf-8") as handle:
        data = json.load(handle)
    data["instance"] = Instance.from_dict(data["instance"])
    return data
