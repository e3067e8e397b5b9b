import dataclasses
import json

import numpy as np
import pytest

from prpmi import (
    GenerationSpec,
    InstanceSchemaError,
    InstanceValidationError,
    ParameterError,
    cumulative_demand,
    generate_instance,
    load_instance,
    save_instance,
    validate_instance,
)
from prpmi.exceptions import IndexRangeError
from prpmi.instance import HOURS, SOURCE_TABLE, demand_factor, weekday_profile


@pytest.fixture(scope="module")
def week_instance():
    """Fixture to generate a one-source week instance."""
    return generate_instance(GenerationSpec(n_sources=1, dest_ratio=6.0, storage_ratio=1.4, rng_seed=7))


def test_generated_sizes(week_instance):
    """Test if the generator derives destinations and storages from the ratios."""
    assert week_instance.n_destinations == 6, f"Expected 6 destinations, got {week_instance.n_destinations}"
    assert week_instance.n_storages == 8, f"Expected 8 storages, got {week_instance.n_storages}"
    assert week_instance.horizon == 7
    assert week_instance.sources[0].refill_capacity == SOURCE_TABLE[0][0]
    assert week_instance.sources[0].refill_price == SOURCE_TABLE[0][1]


def test_generated_instance_is_valid(week_instance):
    """Test if generated instances satisfy every checked condition."""
    violations = validate_instance(week_instance)
    assert violations == [], f"Unexpected violations: {[str(v) for v in violations]}"


def test_generation_is_deterministic(week_instance):
    """Test if the same seed produces the same instance."""
    again = generate_instance(GenerationSpec(n_sources=1, dest_ratio=6.0, storage_ratio=1.4, rng_seed=7))
    assert again == week_instance, "Same seed produced a different instance"


def test_weekday_and_weekend_totals(week_instance):
    """Test if weekdays sum to the magnitude and weekends are scaled down."""
    totals = week_instance.daily_demand
    assert np.allclose(totals[:, :5], 85.0), f"Weekday totals differ from 85: {totals[:, :5]}"
    assert np.allclose(totals[:, 5], 42.5), f"Sixth-day totals differ from 42.5: {totals[:, 5]}"
    assert np.allclose(totals[:, 6], 21.25), f"Seventh-day totals differ from 21.25: {totals[:, 6]}"


def test_weekday_profile_peaks():
    """Test if the weekday profile is non-negative and sums to the magnitude."""
    profile = weekday_profile(130.0, (1.0, 1.0, 1.0))
    assert profile.shape == (HOURS,)
    assert (profile >= 0).all()
    assert profile.sum() == pytest.approx(130.0)
    assert profile[8] > profile[3], "Morning peak should exceed the night"


def test_demand_factor_repeats_weekly():
    assert demand_factor(1) == 1.0
    assert demand_factor(6) == 0.5
    assert demand_factor(7) == 0.25
    assert demand_factor(13) == 0.5


def test_generation_spec_ranges():
    """Test if out-of-range generation parameters are rejected."""
    for spec in (
        GenerationSpec(n_sources=9),
        GenerationSpec(dest_ratio=3.0),
        GenerationSpec(storage_ratio=2.0),
        GenerationSpec(demand_magnitude=100.0),
        GenerationSpec(dissatisfaction_profile=(1.0, 1.0)),
    ):
        with pytest.raises(ParameterError):
            generate_instance(spec)


def test_round_trip(tmp_path, week_instance):
    """Test if saving and loading preserves the instance."""
    path = tmp_path / "week.json"
    save_instance(week_instance, path)
    loaded = load_instance(path)
    assert loaded == week_instance, "Loaded instance differs from the saved one"
    assert json.loads(path.read_text(encoding="utf-8"))["schema_version"] == 1


def test_schema_errors_list_every_field(tmp_path, tiny_instance):
    """Test if a malformed file reports all invalid fields."""
    data = tiny_instance.to_dict()
    del data["horizon"]
    data["destinations"][0]["hourly_demand"][0] = [1.0] * 23
    data["unexpected"] = True
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(InstanceSchemaError) as info:
        load_instance(path)
    assert len(info.value.errors) >= 3, f"Expected at least 3 errors, got {info.value.errors}"


def test_invalid_json(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(InstanceSchemaError):
        load_instance(path)


def test_demand_above_capacity(tmp_path, tiny_instance):
    """Test if a day demand above the storage capacity is reported and rejected on load."""
    small = dataclasses.replace(tiny_instance, storage_capacity=50.0, destinations=tuple(
        dataclasses.replace(d, initial_stock=50.0) for d in tiny_instance.destinations
    ), sources=tuple(
        dataclasses.replace(s, initial_storages=(50.0,) * len(s.initial_storages)) for s in tiny_instance.sources
    ))
    violations = validate_instance(small)
    assert {v.assumption for v in violations} == {"A2"}, f"Unexpected violations: {violations}"
    assert str(violations[0]).startswith("[A2]")

    path = tmp_path / "small.json"
    save_instance(small, path)
    with pytest.raises(InstanceValidationError) as info:
        load_instance(path)
    assert len(info.value.violations) == len(violations)
    assert load_instance(path, validate=False) == small


def test_late_swap_and_crowded_source(tiny_instance):
    """Test if swaps after the last hour and overfull sources are reported."""
    late = dataclasses.replace(
        tiny_instance, transport=dataclasses.replace(tiny_instance.transport, depart_hour=22)
    )
    assert "A5" in {v.assumption for v in validate_instance(late)}
    crowded = dataclasses.replace(
        tiny_instance,
        sources=(dataclasses.replace(tiny_instance.sources[0], initial_storages=(200.0,) * 3),),
    )
    assert "A6" in {v.assumption for v in validate_instance(crowded)}


def test_cumulative_demand(tiny_instance):
    """Test if cumulative demand sums the hours up to and including h."""
    hourly = tiny_instance.destinations[1].hourly_demand[1]
    assert cumulative_demand(tiny_instance, 1, 2, 0) == pytest.approx(hourly[0])
    assert cumulative_demand(tiny_instance, 1, 2, 12) == pytest.approx(sum(hourly[:13]))
    assert cumulative_demand(tiny_instance, 1, 2, 23) == pytest.approx(sum(hourly))


@pytest.mark.parametrize("args", [(2, 1, 0), (0, 0, 0), (0, 3, 0), (0, 1, 24), (0, 1, -1)])
def test_cumulative_demand_range(tiny_instance, args):
    with pytest.raises(IndexRangeError):
        cumulative_demand(tiny_instance, *args)


def test_swap_hours(greedy_fixture):
    """Test if swap hours add the loading, driving and swap times to the departure."""
    instance = greedy_fixture["instance"]
    assert instance.transport.overhead(0, 0) == 2
    assert instance.transport.overhead(0, 1) == 3
    assert instance.swap_hours.tolist() == [[10, 11]]
