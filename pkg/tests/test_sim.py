import csv
import io
import math

import pytest

from mastlab.bounds import exact_mast_mean, model_distribution
from mastlab.random_trees import SameShape, Uniform
from mastlab.sim import (
    ExperimentConfig,
    FitError,
    linear_fit,
    records_csv,
    run_blob_intersect,
    run_comb_slope,
    run_mast_sandwich,
    summarize,
    summary_csv,
)
from mastlab.tree_core import shape_code


class TestLinearFit:
    def test_exact_line(self):
        fit = linear_fit([(0, 0), (1, 1), (2, 2)])
        assert (fit.slope, fit.intercept, fit.r_squared, fit.points) == (1, 0, 1, 3)

    def test_flat(self):
        fit = linear_fit([(0, 1), (1, 1)])
        assert fit.slope == 0 and fit.intercept == 1

    def test_vertical(self):
        with pytest.raises(FitError):
            linear_fit([(0, 0), (0, 1)])

    def test_too_few(self):
        with pytest.raises(FitError):
            linear_fit([(1, 1)])


class TestConfig:
    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            ExperimentConfig("x", (), 10)
        with pytest.raises(ValueError):
            ExperimentConfig("x", (8, 4), 10)
        with pytest.raises(ValueError):
            ExperimentConfig("x", (8,), 0)

    def test_default_k(self):
        assert ExperimentConfig("x", (1024,)).k_for(1024) == 32
        assert ExperimentConfig("x", (1000,)).k_for(1000) == 32


class TestCombSlope:
    def test_single_point_fit_error(self):
        with pytest.raises(FitError):
            run_comb_slope(ExperimentConfig("comb-slope", (64,), 5))

    def test_deterministic(self):
        config = ExperimentConfig("comb-slope", (16, 64, 256), 30, seed=3)
        a, b = run_comb_slope(config), run_comb_slope(config)
        assert records_csv(a.records) == records_csv(b.records)
        assert a.fit == b.fit

    def test_records_both_counts(self):
        result = run_comb_slope(ExperimentConfig("comb-slope", (16, 32), 4))
        stats = {(r.n, r.replicate, r.statistic) for r in result.records}
        assert len(stats) == 2 * 4 * 2
        for r in result.records:
            if r.statistic == "comb_conservative":
                full = next(x for x in result.records
                            if (x.n, x.replicate, x.statistic) == (r.n, r.replicate, "comb_full"))
                assert full.value - 1 <= r.value <= full.value

    def test_worker_count_does_not_change_output(self):
        config = ExperimentConfig("comb-slope", (16, 32), 12, seed=5, workers=1)
        parallel = ExperimentConfig("comb-slope", (16, 32), 12, seed=5, workers=2)
        assert records_csv(run_comb_slope(config).records) == records_csv(run_comb_slope(parallel).records)


class TestSandwich:
    def test_witness_below_mast(self):
        result = run_mast_sandwich(ExperimentConfig("mast-sandwich", (30, 80), 20))
        values = {(r.n, r.replicate, r.statistic): r.value for r in result.records}
        for (n, rep, stat), value in values.items():
            if stat == "witness":
                assert value <= values[(n, rep, "mast")]
        stats = {row.statistic for row in result.summary}
        assert stats == {"mast", "witness", "lower_bound", "upper_bound"}

    def test_rejects_small_lambda(self):
        with pytest.raises(ValueError):
            run_mast_sandwich(ExperimentConfig("mast-sandwich", (16,), 2, lam=3.8))

    def test_four_leaves_against_exact_mean(self):
        # fresh uniform base per replicate: exact mean averages the shape models
        shape_mass = {}
        rep = {}
        for t, p in model_distribution(Uniform(4)).items():
            code = shape_code(t)
            shape_mass[code] = shape_mass.get(code, 0) + p
            rep.setdefault(code, t)
        exact = sum(float(mass) * float(exact_mast_mean(SameShape(rep[c]))) for c, mass in shape_mass.items())
        result = run_mast_sandwich(ExperimentConfig("mast-sandwich", (4,), 4000, seed=8))
        row = next(r for r in result.summary if r.statistic == "mast")
        assert abs(row.mean - exact) <= 3 * row.stderr


class TestBlobIntersect:
    def test_rows_and_fraction(self):
        result = run_blob_intersect(ExperimentConfig("blob-intersect", (100,), 10))
        for r in result.records:
            if r.statistic == "fraction":
                assert 0 <= r.value <= 1
        pooled = next(r for r in result.summary if r.statistic == "pooled_frequency")
        assert 0 < pooled.mean <= 1


class TestCsv:
    def test_schema_and_recomputable_means(self):
        result = run_mast_sandwich(ExperimentConfig("mast-sandwich", (20, 40), 15))
        rows = list(csv.DictReader(io.StringIO(records_csv(result.records))))
        assert list(rows[0]) == ["experiment", "n", "replicate", "stream_seed", "statistic", "value"]
        summary = list(csv.DictReader(io.StringIO(summary_csv(result.summary))))
        assert list(summary[0]) == ["experiment", "n", "statistic", "mean", "stderr", "count"]
        for row in summary:
            if row["statistic"] in ("mast", "witness"):
                values = [float(r["value"]) for r in rows
                          if r["n"] == row["n"] and r["statistic"] == row["statistic"]]
                assert float(row["mean"]) == math.fsum(values) / len(values)
                assert int(row["count"]) == len(values)

    def test_float_round_trip(self):
        result = run_blob_intersect(ExperimentConfig("blob-intersect", (64,), 6))
        text = records_csv(result.records)
        parsed = [float(r["value"]) for r in csv.DictReader(io.StringIO(text))]
        assert parsed == [float(r.value) for r in result.records]
        assert "\r" not in text

    def test_summarize_single_value(self):
        result = run_comb_slope(ExperimentConfig("comb-slope", (16, 32), 1))
        assert all(row.stderr == 0 for row in summarize(result.records))
