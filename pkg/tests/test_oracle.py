import pytest

from prpmi import (
    OracleSizeError,
    Status,
    brute_force_oracle,
    build_full_model,
    build_teg,
    check_routing,
    full_milp_method,
    generate_small_instance,
    greedy_method,
    solve_reference,
)
from prpmi.oracle import check_oracle_size, routing_patterns

# horizons cycle through 1, 2 and 3 days
GENERATED = [(seed, 1 + seed % 3) for seed in range(1, 11)]


@pytest.fixture(scope="module")
def one_day_teg(one_day_instance):
    """Fixture to build the graph of the one-day instance."""
    return build_teg(one_day_instance)


@pytest.fixture(scope="module")
def oracle_full(one_day_instance, one_day_teg):
    """Fixture to run the exhaustive search once on the full problem."""
    return brute_force_oracle(one_day_instance, one_day_teg)


def test_size_guard():
    """Test if instances beyond the enumeration limits are refused."""
    with pytest.raises(OracleSizeError):
        check_oracle_size(generate_small_instance(n_destinations=3, n_storages=4))
    with pytest.raises(OracleSizeError):
        check_oracle_size(generate_small_instance(horizon=4))


def test_patterns_satisfy_routing(one_day_instance, one_day_teg):
    """Test if every enumerated flow satisfies the routing constraints."""
    patterns = list(routing_patterns(one_day_instance, one_day_teg))
    # no delivery, s0 to d0, s0 to d1
    assert len(patterns) == 3, f"Expected 3 patterns, got {len(patterns)}"
    for y in patterns:
        assert check_routing(one_day_instance, one_day_teg, y) == []


def test_oracle_matches_branch_and_bound(one_day_instance, one_day_teg, oracle_full):
    """Test if the reference solver reaches the enumerated optimum."""
    outcome = solve_reference(build_full_model(one_day_instance, one_day_teg))
    assert outcome.value == pytest.approx(oracle_full.value, rel=1e-6, abs=1e-6), (
        f"Branch-and-bound {outcome.value} differs from enumeration {oracle_full.value}"
    )
    assert oracle_full.solution is not None
    assert oracle_full.solution.cost == pytest.approx(oracle_full.value, abs=1e-6)


def test_relaxation_is_a_lower_bound(one_day_instance, one_day_teg, oracle_full):
    relaxed = brute_force_oracle(one_day_instance, one_day_teg, assignment=False)
    assert relaxed.value <= oracle_full.value + 1e-6


def test_greedy_is_an_upper_bound(one_day_instance, one_day_teg, oracle_full):
    assert oracle_full.value <= greedy_method(one_day_instance, one_day_teg).cost + 1e-6


def test_zero_demand(zero_demand_instance):
    """Test if an instance without demand has optimum zero."""
    result = brute_force_oracle(zero_demand_instance, build_teg(zero_demand_instance))
    assert result.value == pytest.approx(0.0, abs=1e-9)
    assert result.patterns > 1


@pytest.mark.parametrize("seed, horizon", GENERATED)
def test_oracle_matches_methods_on_generated_instances(seed, horizon):
    """Test if branch-and-bound and MA reach the enumerated optimum, with RH and GH bounds around it."""
    instance = generate_small_instance(seed=seed, horizon=horizon)
    teg = build_teg(instance)
    oracle = brute_force_oracle(instance, teg)
    label = f"seed {seed}, horizon {horizon}"

    outcome = solve_reference(build_full_model(instance, teg))
    assert outcome.status is Status.OPTIMAL, label
    assert outcome.value == pytest.approx(oracle.value, rel=1e-6, abs=1e-6), (
        f"{label}: branch-and-bound {outcome.value} differs from enumeration {oracle.value}"
    )
    seeded = full_milp_method(instance, teg)
    assert seeded.cost == pytest.approx(oracle.value, rel=1e-6, abs=1e-6), f"{label}: MA {seeded.cost}"

    relaxed = brute_force_oracle(instance, teg, assignment=False)
    assert relaxed.value <= oracle.value + 1e-6, label
    assert oracle.value <= greedy_method(instance, teg).cost + 1e-6, label
