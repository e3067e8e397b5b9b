import pandas as pd
import pytest
import pytest_asyncio

from prpmi import ParameterError, SolveLimits, generate_small_instance
from prpmi.bench import (
    BOXPLOT_COLUMNS,
    RECORD_COLUMNS,
    BenchRecord,
    boxplot_frame,
    boxplot_stats,
    build_suite,
    destination_bin,
    method_deltas,
    run_record,
    run_suite,
    summarize,
    trend_check,
    write_outputs,
)

COSTS = [1.0, 2.0, 3.0, 4.0, 100.0]


@pytest.fixture(scope="module")
def records():
    """Fixture to fabricate GH and RH records with equal costs."""
    rows = []
    for k, cost in enumerate(COSTS):
        for method, bound in (("GH", None), ("RH", cost)):
            rows.append(
                BenchRecord(
                    instance=f"i{k}",
                    method=method,
                    status="Optimal",
                    cost=cost,
                    bound=bound,
                    gap=None if bound is None else 0.0,
                    q_destination="Q1",
                    s_demand="yes",
                    n_sources=2,
                    n_destinations=12,
                    n_storages=16,
                    runtime=0.5,
                )
            )
    return rows


def test_boxplot_stats():
    """Test if quartiles, whiskers and outliers follow the 1.5 IQR rule."""
    stats = boxplot_stats(COSTS)
    assert stats["median"] == 3.0
    assert stats["q1"] == 2.0
    assert stats["q3"] == 4.0
    assert stats["lo_whisker"] == 1.0
    assert stats["hi_whisker"] == 4.0
    assert stats["outliers"] == [100.0]
    assert stats["mean"] == pytest.approx(22.0)
    with pytest.raises(ParameterError):
        boxplot_stats([None])


def test_destination_bins():
    assert [destination_bin(n) for n in (9, 10, 18, 19, 35, 36, 48, 49)] == [
        None, "Q1", "Q1", "Q2", "Q3", "Q4", "Q4", None,
    ]


def test_build_suite():
    """Test if the suite spreads instances evenly over the destination bins."""
    suite = build_suite(seed=5, count=8, horizon=1)
    bins = pd.Series([destination_bin(i.n_destinations) for i in suite]).value_counts()
    assert bins.to_dict() == {"Q1": 2, "Q2": 2, "Q3": 2, "Q4": 2}, bins.to_dict()
    for instance in suite:
        ratio = instance.n_destinations / instance.n_sources
        assert 4.33 <= ratio <= 8.5, f"{instance.name}: destination ratio {ratio}"
        storages = instance.n_storages / instance.n_destinations
        assert 1.26 <= storages <= 1.5, f"{instance.name}: storage ratio {storages}"
    assert suite[0].daily_demand[:, 0] == pytest.approx(85.0)
    assert suite[1].daily_demand[:, 0] == pytest.approx(130.0)
    assert suite[0].cost.fixed_dissatisfaction == 1500.0
    assert build_suite(seed=5, count=8, horizon=1) == suite
    with pytest.raises(ParameterError):
        build_suite(seed=5, count=3)


def test_summary(records):
    """Test if the summary carries boxplot statistics per method, metric and group."""
    summary = summarize(records)
    row = summary[(summary["method"] == "GH") & (summary["metric"] == "cost") & (summary["group"] == "all")]
    assert len(row) == 1
    row = row.iloc[0]
    assert (row["median"], row["q1"], row["q3"], row["hi_whisker"]) == (3.0, 2.0, 4.0, 4.0)
    assert row["outliers"] == "100"
    assert set(summary["group"]) == {"all", "Q1", "s_demand=yes"}
    assert summary[(summary["method"] == "GH") & (summary["metric"] == "gap")].empty


def test_boxplot_and_deltas(records):
    assert list(boxplot_frame(records).columns) == list(BOXPLOT_COLUMNS)
    deltas = method_deltas(records)
    assert set(zip(deltas["method_a"], deltas["method_b"])) == {("RH", "GH"), ("GH", "RH")}
    assert (deltas["median_delta_pct"] == 0.0).all()
    assert (deltas["mean_delta_pct"] == 0.0).all()


def test_trend_check(records):
    report = trend_check(records)
    assert report.best_beats_greedy is True
    assert report.largest_bin == "Q1"
    assert report.rh_gap_below_ma is None


def test_write_outputs(tmp_path, records):
    """Test if every CSV file is written with its header."""
    paths = write_outputs(records, tmp_path / "out")
    assert set(paths) == {"records", "summary", "boxplot", "deltas", "runtimes"}
    assert tuple(pd.read_csv(paths["records"]).columns) == RECORD_COLUMNS
    runtimes = pd.read_csv(paths["runtimes"])
    assert list(runtimes.columns) == ["instance", "method", "runtime"]
    assert len(runtimes) == len(records)


def test_failed_method_becomes_error_record():
    def failing(model, limits):
        raise RuntimeError("solver crashed")

    record = run_record(generate_small_instance(horizon=1), "gh", solve=failing)
    assert record.status == "Error"
    assert record.cost is None
    assert "solver crashed" in record.message


@pytest_asyncio.fixture(scope="module")
async def suite_records():
    """Fixture to run GH and RH on two one-day instances."""
    instances = [generate_small_instance(seed=seed, horizon=1) for seed in (0, 1)]
    return await run_suite(instances, ["rh", "gh"], workers=2)


@pytest.mark.asyncio
async def test_run_suite_records(suite_records):
    """Test if run_suite returns one record per instance and method, in order."""
    assert len(suite_records) == 4
    assert [r.method for r in suite_records] == ["RH", "GH", "RH", "GH"]
    assert all(r.status == "Optimal" for r in suite_records), [r.message for r in suite_records]


@pytest.mark.asyncio
async def test_run_suite_bounds(suite_records):
    for record in suite_records:
        if record.method == "RH":
            assert record.bound <= record.cost + 1e-6
        else:
            assert record.bound is None


@pytest.mark.asyncio
async def test_run_suite_arguments():
    instances = [generate_small_instance(horizon=1)]
    for methods, workers in (([], 1), (["zz"], 1), (["gh"], 0)):
        with pytest.raises(ParameterError):
            await run_suite(instances, methods, workers=workers)


@pytest.mark.asyncio
async def test_run_suite_on_suite_instance():
    """Test if GH produces a costed record on the smallest instance of a generated suite."""
    instance = min(build_suite(seed=0, count=4), key=lambda i: i.n_destinations)
    records = await run_suite([instance], ["gh"], SolveLimits(wall_clock=60.0))
    assert len(records) == 1
    record = records[0]
    assert record.status in ("Optimal", "FeasibleTimeLimit"), record.message
    assert record.cost is not None and record.cost > 0.0
    assert record.q_destination == "Q1"
    assert record.n_destinations == instance.n_destinations
