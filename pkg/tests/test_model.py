import dataclasses

import numpy as np
import pytest

from prpmi import (
    GreedyConfig,
    InstanceValidationError,
    RoutingInfeasibleError,
    SolveLimits,
    build_full_model,
    build_refill_subproblem,
    build_relaxed_model,
    check_routing,
    evaluate_cost,
    generate_small_instance,
    greedy_method,
    greedy_routing,
    solve_reference,
)
from prpmi.config import FEASIBILITY_TOLERANCE
from prpmi.model import (
    FlowSolution,
    destination_stock_frame,
    initial_flows,
    routing_start,
    solution_summary,
    swap_hour_frame,
)
from prpmi.teg import TimeIndex, build_teg


def _sizes(instance, teg):
    S, D, J = instance.n_sources, instance.n_destinations, instance.horizon
    slots = [s.slot_limit for s in instance.sources]
    squares = sum((D + k) ** 2 for k in slots)
    r0 = len(teg.arc_ids_at(TimeIndex.right(0)))
    variables = 2 * len(teg) + 6 * D * J + S * J + J * squares
    binaries = len(teg) + 3 * D * J + J * squares
    per_source = sum(3 + (k - 1) + 2 * k + 2 * (D + k) + (D + k) ** 2 for k in slots)
    rows = 2 * r0 + len(teg) + D * 2 * J + 17 * D * J + J * per_source
    return variables, binaries, rows, J * squares, J * sum(2 * (D + k) + (D + k) ** 2 for k in slots)


@pytest.fixture(scope="module")
def full_model(tiny_instance, tiny_teg):
    """Fixture to build the full model of the tiny instance."""
    return build_full_model(tiny_instance, tiny_teg)


@pytest.fixture(scope="module")
def relaxed_model(tiny_instance, tiny_teg):
    """Fixture to build the relaxed model of the tiny instance."""
    return build_relaxed_model(tiny_instance, tiny_teg)


def test_full_model_size(tiny_instance, tiny_teg, full_model):
    """Test if the full model has the expected numbers of variables, binaries and rows."""
    variables, binaries, rows, _, _ = _sizes(tiny_instance, tiny_teg)
    assert (variables, binaries, rows) == (118, 74, 182)
    assert full_model.n_variables == variables, full_model.summary()
    assert full_model.n_binaries == binaries, full_model.summary()
    assert full_model.n_constraints == rows, full_model.summary()


def test_relaxed_model_drops_assignments(tiny_instance, tiny_teg, full_model, relaxed_model):
    """Test if the relaxed model is the full model without assignment variables and rows."""
    _, _, _, beta_columns, beta_rows = _sizes(tiny_instance, tiny_teg)
    assert relaxed_model.n_variables == full_model.n_variables - beta_columns
    assert relaxed_model.n_constraints == full_model.n_constraints - beta_rows
    assert relaxed_model.beta == {}
    assert not any(v.name.startswith("beta_") for v in relaxed_model.variables)


def test_variable_names(full_model):
    names = {v.name for v in full_model.variables}
    for name in ("y_s0_d1_L2", "f_d0_d0_R0", "zL_d1_2", "zR_d0_1", "u_d1_1", "r_s0_2", "beta_s0_L1_0_3"):
        assert name in names, f"Missing variable {name}"


def test_initial_flows(tiny_instance, tiny_teg):
    """Test if R0 carries the initial storages and nothing else."""
    flows = initial_flows(tiny_instance, tiny_teg)
    active = {tiny_teg.arcs[a].name: f for a, (y, f) in flows.items() if y}
    assert active == {"d0_d0_R0": 200.0, "d1_d1_R0": 200.0, "s0k1_R0": 200.0}


def test_invalid_instance_is_rejected(tiny_instance):
    broken = dataclasses.replace(tiny_instance, storage_capacity=10.0)
    with pytest.raises(InstanceValidationError):
        build_full_model(broken)


def test_routing_check_accepts_greedy(tiny_instance, tiny_teg):
    y = greedy_routing(tiny_instance, tiny_teg)
    assert check_routing(tiny_instance, tiny_teg, y) == []


def test_routing_check_reports_families(tiny_instance, tiny_teg):
    """Test if corrupted flows name the violated constraint families."""
    y = greedy_routing(tiny_instance, tiny_teg).copy()
    y[tiny_teg.dd(0, TimeIndex.left(1))] = 0
    assert any(p.startswith("one-storage-per-destination") for p in check_routing(tiny_instance, tiny_teg, y))

    y = greedy_routing(tiny_instance, tiny_teg).copy()
    y[tiny_teg.sd(0, 1, 2)] = 1
    families = {p.split(":")[0] for p in check_routing(tiny_instance, tiny_teg, y)}
    assert "swap-returns" in families

    assert check_routing(tiny_instance, tiny_teg, np.zeros(3))[0].startswith("shape")
    half = greedy_routing(tiny_instance, tiny_teg).astype(float)
    half[0] = 0.5
    assert "binary: storage flow must be 0 or 1" in check_routing(tiny_instance, tiny_teg, half)


def test_refill_subproblem_rejects_bad_routing(tiny_instance, tiny_teg):
    y = greedy_routing(tiny_instance, tiny_teg).copy()
    y[tiny_teg.sk(0, 1, TimeIndex.right(0))] = 0
    with pytest.raises(RoutingInfeasibleError) as info:
        build_refill_subproblem(tiny_instance, tiny_teg, y)
    assert info.value.constraint == "initial-storages"


def test_refill_subproblem_shape(tiny_instance, tiny_teg):
    """Test if the refill subproblem keeps hydrogen only on active arcs and excludes transport."""
    y = greedy_routing(tiny_instance, tiny_teg)
    model = build_refill_subproblem(tiny_instance, tiny_teg, y)
    assert model.n_variables < 2 * len(tiny_teg)
    assert all(isinstance(model.y[a], float) for a in range(len(tiny_teg)))
    flows = sum(1 for v in model.variables if v.name.startswith("f_"))
    assert flows == int(np.sum(y))
    assert not any(v.name.startswith("y_") for v in model.variables)
    assert model.transport_cost.is_constant


@pytest.mark.parametrize(
    "build",
    [
        build_full_model,
        build_relaxed_model,
        lambda instance, teg: build_refill_subproblem(instance, teg, greedy_routing(instance, teg)),
    ],
    ids=["full", "relaxed", "refill"],
)
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_routing_start_is_feasible(build, seed):
    """Test if the simulated refill of the greedy routing satisfies every row of each variant."""
    instance = generate_small_instance(seed=seed, horizon=3)
    teg = build_teg(instance)
    model = build(instance, teg)
    values = routing_start(model, greedy_routing(instance, teg))
    assert model.max_violation(values) <= FEASIBILITY_TOLERANCE, f"{model.name}: {model.max_violation(values)}"
    outcome = solve_reference(model, SolveLimits(wall_clock=10.0), start=values)
    assert outcome.incumbent_history[0] == pytest.approx(model.objective_value(values))
    assert outcome.value <= model.objective_value(values) + 1e-6


def test_routing_start_rejects_bad_routing(full_model, tiny_instance, tiny_teg):
    y = greedy_routing(tiny_instance, tiny_teg).copy()
    y[tiny_teg.dd(1, TimeIndex.right(1))] = 0
    with pytest.raises(RoutingInfeasibleError):
        routing_start(full_model, y)


def _manual_solution(instance, teg, served, refill=None, active=()):
    shape = (instance.n_destinations, instance.horizon)
    y = np.zeros(len(teg), dtype=int)
    for a in active:
        y[a] = 1
    return FlowSolution(
        y=y,
        f=np.zeros(len(teg)),
        z_left=np.zeros(shape),
        z_right=np.asarray(served, dtype=float).reshape(shape),
        refill=np.zeros((instance.n_sources, instance.horizon)) if refill is None else np.asarray(refill, dtype=float),
        unmet_flag=np.zeros(shape, dtype=int),
        daily_demand=instance.daily_demand,
    )


def test_evaluate_cost_transport(greedy_fixture):
    """Test if transport counts each active delivery and return arc once, ignoring R0."""
    instance = greedy_fixture["instance"]
    teg = build_teg(instance)
    active = [teg.sd(0, 1, 1), teg.ds(1, 0, TimeIndex.right(1)), teg.ds(0, 0, TimeIndex.right(0))]
    solution = _manual_solution(instance, teg, instance.daily_demand, active=active)
    costs = evaluate_cost(instance, solution, teg)
    assert costs.transport == pytest.approx(2.25 * 180.0)
    assert costs.variable_dissatisfaction == 0.0
    assert costs.fixed_dissatisfaction == 0.0


def test_evaluate_cost_dissatisfaction_and_refill(greedy_fixture):
    """Test if unmet demand is charged per kg and once per destination and day."""
    instance = greedy_fixture["instance"]
    teg = build_teg(instance)
    served = instance.daily_demand.copy()
    served[0, 0] -= 10.0
    served[1, 2] -= 1e-7
    solution = _manual_solution(instance, teg, served, refill=[[100.0, 0.0, 20.0]])
    costs = evaluate_cost(instance, solution, teg)
    assert costs.variable_dissatisfaction == pytest.approx(12.0 * (10.0 + 1e-7))
    assert costs.fixed_dissatisfaction == 1500.0
    assert costs.refill == pytest.approx(9.0 * 120.0)
    assert costs.total == pytest.approx(costs.refill + costs.variable_dissatisfaction + 1500.0)


def test_evaluate_cost_dimensions(greedy_fixture):
    instance = greedy_fixture["instance"]
    solution = _manual_solution(instance, build_teg(instance), instance.daily_demand)
    with pytest.raises(ValueError):
        evaluate_cost(dataclasses.replace(instance, horizon=2), solution)


def test_zero_demand_costs_nothing(zero_demand_instance):
    """Test if an instance without demand has a zero-cost optimum."""
    model = build_full_model(zero_demand_instance)
    outcome = solve_reference(model)
    assert outcome.value == pytest.approx(0.0, abs=1e-6)


def test_summary_and_frames(greedy_fixture):
    instance = greedy_fixture["instance"]
    teg = build_teg(instance)
    result = greedy_method(instance, teg, greedy=GreedyConfig(greedy_fixture["critical_threshold"]))
    summary = solution_summary(instance, result.solution)
    assert summary["deliveries"] == 2
    assert len(summary["unmet_by_day_kg"]) == 3
    stocks = destination_stock_frame(instance, teg, result.solution)
    assert len(stocks) == 2 * (2 * 3 + 1)
    flows = result.solution.to_frame(teg)
    assert list(flows.columns) == ["arc", "kind", "time", "tail", "head", "y", "f"]
    assert len(flows) == len(teg)


def test_swap_hours_follow_deliveries(greedy_fixture):
    """Test if swap hours come from the delivering source and default to noon elsewhere."""
    instance = greedy_fixture["instance"]
    result = greedy_method(instance, greedy=GreedyConfig(greedy_fixture["critical_threshold"]))
    swaps = swap_hour_frame(instance, result.solution).set_index(["day", "source", "destination"])["hour"]
    assert len(swaps) == 6
    assert swaps[(2, 0, 0)] == 10, f"Expected swap at hour 10, got {swaps[(2, 0, 0)]}"
    assert swaps[(3, 0, 1)] == 11
    assert swaps[(1, 0, 0)] == 12
    assert swaps[(2, 0, 1)] == 12
