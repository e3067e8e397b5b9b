import dataclasses

import pytest

from prpmi import (
    DecodeError,
    GreedyConfig,
    build_teg,
    check_flow_count,
    derive_transport_plans,
    greedy_method,
    plans_frame,
)
from prpmi.planning import extend_bijection, physical_itinerary
from prpmi.teg import ArcKind, TimeIndex


@pytest.fixture(scope="module")
def greedy_solution(greedy_fixture):
    """Fixture to solve the hand-traced instance with the greedy heuristic."""
    instance = greedy_fixture["instance"]
    teg = build_teg(instance)
    greedy = GreedyConfig(greedy_fixture["critical_threshold"])
    return instance, teg, greedy_method(instance, teg, greedy=greedy).solution


@pytest.fixture(scope="module")
def plans(greedy_solution):
    """Fixture to decode the greedy solution into transport plans."""
    _, teg, solution = greedy_solution
    return derive_transport_plans(teg, solution)


def test_one_plan_per_storage(greedy_solution, plans):
    instance, teg, _ = greedy_solution
    assert len(plans) == instance.n_storages == 3
    assert all(len(plan) == 2 * instance.horizon + 1 for plan in plans)


def test_plans_partition_active_arcs(greedy_solution, plans):
    """Test if plans are disjoint and together cover every active arc."""
    _, teg, solution = greedy_solution
    used = [a for plan in plans for a in plan.arcs]
    assert len(used) == len(set(used)), "Plans share arcs"
    active = {a for a in range(len(teg)) if solution.y[a]}
    assert set(used) == active, f"Uncovered arcs: {active - set(used)}"


def test_plans_follow_the_graph(greedy_solution, plans):
    """Test if each arc of a plan starts where the previous one ends."""
    _, teg, _ = greedy_solution
    for plan in plans:
        for a, b in zip(plan.arcs, plan.arcs[1:]):
            assert teg.head(a) == teg.tail(b), f"{teg.arcs[a].name} does not lead to {teg.arcs[b].name}"


def test_delivered_storage_itinerary(greedy_solution, plans):
    """Test if the storage parked at the source is delivered on day 2 and stays there."""
    _, teg, solution = greedy_solution
    parked = next(p for p in plans if teg.arcs[p.arcs[0]].kind is ArcKind.SOURCE_SELF)
    places = [row["location"] for row in physical_itinerary(teg, solution, parked)]
    assert places == ["s0", "s0", "s0", "s0", "d0", "d0", "d0"], f"Unexpected itinerary {places}"


def test_flow_count(greedy_solution):
    _, teg, solution = greedy_solution
    counts = check_flow_count(teg, solution)
    assert list(counts.index) == ["R0", "L1", "R1", "L2", "R2", "L3", "R3"]
    assert (counts == 3).all(), counts.to_dict()


def test_plans_frame(greedy_solution, plans):
    _, teg, solution = greedy_solution
    frame = plans_frame(teg, solution, plans)
    assert list(frame.columns) == ["storage_id", "time", "location", "carried_kg"]
    assert len(frame) == 3 * 7
    assert (frame["carried_kg"] >= 0).all()


def test_corrupted_flow_is_rejected(greedy_solution):
    """Test if a flow that breaks conservation is reported with its first violation."""
    _, teg, solution = greedy_solution
    y = solution.y.copy()
    y[teg.sd(0, 1, 1)] = 1
    broken = dataclasses.replace(solution, y=y)
    with pytest.raises(DecodeError, match="4 active arcs at L1, expected 3"):
        derive_transport_plans(teg, broken)

    y = solution.y.copy()
    y[teg.ds(0, 0, TimeIndex.right(2))] = 0
    y[teg.ds(1, 0, TimeIndex.right(2))] = 1
    with pytest.raises(DecodeError, match="deliveries and returns differ"):
        derive_transport_plans(teg, dataclasses.replace(solution, y=y))


def test_extend_bijection():
    """Test if inactive positions are paired in ascending order after the active ones."""
    assert extend_bijection(None, [1, 0, 1], [0, 1, 1]) == (1, 0, 2)
    beta = [[0, 0, 1], [0, 0, 0], [0, 1, 0]]
    assert extend_bijection(beta, [1, 0, 1], [0, 1, 1]) == (2, 0, 1)


def test_extend_bijection_errors():
    with pytest.raises(DecodeError):
        extend_bijection(None, [1, 1, 0], [1, 0, 0])
    with pytest.raises(DecodeError):
        extend_bijection([[0, 1, 0], [0, 1, 0], [0, 0, 0]], [1, 1, 0], [1, 1, 0])
