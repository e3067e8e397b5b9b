import dataclasses

import numpy as np
import pytest

from prpmi import (
    GreedyConfig,
    ParameterError,
    SolveLimits,
    SolverError,
    Status,
    build_teg,
    check_routing,
    compute_phi,
    greedy_method,
    solve_reference,
    two_step_heuristic,
)
from prpmi.bench import build_suite
from prpmi.heuristics import greedy_routing, greedy_trace, run_method
from prpmi.model import initial_flows
from prpmi.solver import SolveOutcome
from prpmi.teg import TimeIndex


@pytest.fixture(scope="module")
def greedy_instance(greedy_fixture):
    return greedy_fixture["instance"]


@pytest.fixture(scope="module")
def greedy_teg(greedy_instance):
    """Fixture to build the graph of the hand-traced instance."""
    return build_teg(greedy_instance)


@pytest.fixture(scope="module")
def traced(greedy_fixture, greedy_instance, greedy_teg):
    """Fixture to run the greedy heuristic with the traced threshold."""
    return greedy_trace(greedy_instance, greedy_teg, GreedyConfig(greedy_fixture["critical_threshold"]))


def test_greedy_trace(greedy_fixture, traced):
    """Test if the greedy decisions follow the hand trace day by day."""
    _, days = traced
    assert len(days) == len(greedy_fixture["trace"])
    for got, expected in zip(days, greedy_fixture["trace"]):
        day = expected["day"]
        assert got.day == day
        assert got.stock_before == pytest.approx(expected["stock_before"]), f"Day {day} stock before"
        assert list(got.available) == expected["available"], f"Day {day} available storages"
        assert list(got.critical) == expected["critical"], f"Day {day} critical destinations"
        assert got.deliveries == {int(d): s for d, s in expected["deliveries"].items()}, f"Day {day} deliveries"
        assert got.stock_after == pytest.approx(expected["stock_after"]), f"Day {day} stock after"


def test_greedy_routing_is_feasible(greedy_instance, greedy_teg, traced):
    y, _ = traced
    assert check_routing(greedy_instance, greedy_teg, y) == []


def test_greedy_method_cost(greedy_fixture, greedy_instance, greedy_teg):
    """Test if GH charges the traced transport and returns a solution without bound."""
    result = greedy_method(greedy_instance, greedy_teg, greedy=GreedyConfig(greedy_fixture["critical_threshold"]))
    assert result.status is Status.OPTIMAL
    assert result.bound is None and result.gap is None
    assert result.solution.costs.transport == pytest.approx(greedy_fixture["transport_cost"])
    assert result.cost == pytest.approx(result.solution.objective)


def _park_everything(instance, teg):
    y = np.zeros(len(teg), dtype=int)
    for a, (y0, _) in initial_flows(instance, teg).items():
        y[a] = y0
    for day in range(1, instance.horizon + 1):
        for i in (TimeIndex.left(day), TimeIndex.right(day)):
            for d in range(instance.n_destinations):
                y[teg.dd(d, i)] = 1
            for s, source in enumerate(instance.sources):
                for k in range(1, len(source.initial_storages) + 1):
                    y[teg.sk(s, k, i)] = 1
    return y


def test_phi_of_parked_routing(greedy_fixture, greedy_instance, greedy_teg):
    """Test if keeping every storage in place costs only the unmet demand."""
    y = _park_everything(greedy_instance, greedy_teg)
    phi, solution = compute_phi(greedy_instance, greedy_teg, y)
    assert phi == pytest.approx(greedy_fixture["park_everything_phi"])
    assert solution.costs.transport == 0.0
    assert solution.costs.refill == pytest.approx(0.0, abs=1e-6)
    assert solution.unmet.sum() == pytest.approx(730.0)
    assert solution.unmet_flag.sum() == 5


def test_phi_without_incumbent(greedy_instance, greedy_teg):
    y = _park_everything(greedy_instance, greedy_teg)
    with pytest.raises(SolverError):
        compute_phi(greedy_instance, greedy_teg, y, solve=lambda model, limits: SolveOutcome(Status.ERROR))


def test_two_step_heuristic(tiny_instance, tiny_teg):
    """Test if RH returns a feasible solution bounded below by the relaxation."""
    result = two_step_heuristic(tiny_instance, tiny_teg)
    assert result.status is Status.OPTIMAL
    assert result.bound <= result.cost + 1e-6
    assert 0.0 <= result.gap <= 1.0
    assert check_routing(tiny_instance, tiny_teg, result.solution.y) == []


def test_two_step_falls_back_to_greedy(tiny_instance, tiny_teg):
    """Test if RH uses the greedy routing when the relaxed step has no incumbent."""
    calls = []

    def solve(model, limits):
        calls.append(model.variant)
        if model.variant == "relaxed":
            return SolveOutcome(Status.ERROR, bound=0.0, message="limit reached without an incumbent")
        return solve_reference(model, limits)

    result = two_step_heuristic(tiny_instance, tiny_teg, solve=solve)
    assert calls == ["relaxed", "refill"]
    assert result.status is Status.FEASIBLE_TIME_LIMIT
    assert "greedy" in result.message
    greedy = greedy_method(tiny_instance, tiny_teg)
    assert result.cost == pytest.approx(greedy.cost)


def test_greedy_threshold_range(tiny_instance, tiny_teg):
    for threshold in (-1.0, tiny_instance.storage_capacity + 1):
        with pytest.raises(ParameterError):
            greedy_method(tiny_instance, tiny_teg, greedy=GreedyConfig(threshold))
    assert GreedyConfig.for_instance(tiny_instance, 42.0).critical_threshold == 42.0


def test_run_method(tiny_instance, tiny_teg):
    assert run_method("gh", tiny_instance, tiny_teg).method == "GH"
    with pytest.raises(ParameterError):
        run_method("xx", tiny_instance, tiny_teg)


def test_refill_receives_the_given_limits(tiny_instance, tiny_teg):
    """Test if GH hands its limits to the refill solve unchanged."""
    seen = []

    def solve(model, limits):
        seen.append(limits)
        return solve_reference(model, limits)

    limits = SolveLimits(wall_clock=30.0, node_limit=7, lp_engine="highs")
    greedy_method(tiny_instance, tiny_teg, limits, solve=solve)
    assert seen == [limits]


def test_greedy_method_reports_refill_time_limit(tiny_instance, tiny_teg):
    """Test if GH reports FeasibleTimeLimit when the refill solve stops at its limits."""

    def solve(model, limits):
        return dataclasses.replace(solve_reference(model, limits), status=Status.FEASIBLE_TIME_LIMIT)

    result = greedy_method(tiny_instance, tiny_teg, solve=solve)
    assert result.status is Status.FEASIBLE_TIME_LIMIT
    assert result.cost == pytest.approx(greedy_method(tiny_instance, tiny_teg).cost)


def test_two_step_reports_refill_time_limit(tiny_instance, tiny_teg):
    def solve(model, limits):
        outcome = solve_reference(model, limits)
        if model.variant == "refill":
            return dataclasses.replace(outcome, status=Status.FEASIBLE_TIME_LIMIT)
        return outcome

    result = two_step_heuristic(tiny_instance, tiny_teg, solve=solve)
    assert result.status is Status.FEASIBLE_TIME_LIMIT


def test_node_limit_keeps_the_greedy_start(greedy_instance, greedy_teg):
    """Test if a one-node search still returns the greedy refill as a solution."""
    y = greedy_routing(greedy_instance, greedy_teg)
    phi, solution = compute_phi(greedy_instance, greedy_teg, y, SolveLimits(node_limit=1))
    optimum, _ = compute_phi(greedy_instance, greedy_teg, y)
    assert phi >= optimum - 1e-6
    assert check_routing(greedy_instance, greedy_teg, solution.y) == []


@pytest.fixture(scope="module")
def desk_instance():
    """Fixture to pick the smallest first-bin instance of a benchmark suite."""
    return min(build_suite(seed=0, count=4), key=lambda instance: instance.n_destinations)


@pytest.mark.parametrize("method", ["GH", "RH"])
def test_methods_on_suite_instance(desk_instance, method):
    """Test if GH and RH return a routing-feasible solution on a full-week suite instance."""
    teg = build_teg(desk_instance)
    result = run_method(method, desk_instance, teg, SolveLimits(wall_clock=60.0))
    assert result.solution is not None, f"{method}: {result.status.value} {result.message}"
    assert result.cost is not None and result.cost > 0.0
    assert result.status in (Status.OPTIMAL, Status.FEASIBLE_TIME_LIMIT)
    assert check_routing(desk_instance, teg, result.solution.y) == []


def test_wall_clock_bounds_two_step_runtime(desk_instance):
    """Test if RH on a suite instance finishes close to the wall clock of its two steps."""
    result = two_step_heuristic(desk_instance, build_teg(desk_instance), SolveLimits(wall_clock=5.0))
    assert result.solution is not None, result.message
    assert result.runtime < 45.0, f"RH took {result.runtime:.1f}s with 5s per step"
