"""Rate campaign plumbing, log-log fits, and goodness-of-fit helpers."""

import math

import numpy as np
import pytest

from renewalbm import (
    BudgetError,
    InputError,
    RateConditionError,
    RateExperimentConfig,
    as_trace,
    covariance_check,
    fit_rate,
    ks_normal,
    ks_two_sample,
    ks_uniform,
    rate_scale,
    run_rate_experiment,
    uniform01,
)

LAW = uniform01()


def test_rate_scale_values():
    assert rate_scale(4, 2.0) == pytest.approx(0.5 * math.log(4.0) ** 1.5, rel=1e-12)
    assert rate_scale(100, 2.0) == pytest.approx(0.1 * math.log(100.0) ** 1.5, rel=1e-12)
    # the deviation scale peaks at n = e^3 and is not monotone
    vals = [rate_scale(n, 2.0) for n in (4, 8, 16, 32, 64)]
    assert vals[2] == max(vals)
    with pytest.raises(InputError):
        rate_scale(1, 2.0)


def test_config_validation():
    ok = dict(law=LAW, k=2.0, n_grid=(4, 8), reps=5, master_seed=1)
    RateExperimentConfig(**ok)
    with pytest.raises(RateConditionError):
        RateExperimentConfig(**{**ok, "k": 1.0})
    with pytest.raises(InputError):
        RateExperimentConfig(**{**ok, "n_grid": ()})
    with pytest.raises(InputError):
        RateExperimentConfig(**{**ok, "n_grid": (8, 4)})
    with pytest.raises(InputError):
        RateExperimentConfig(**{**ok, "n_grid": (1, 4)})
    with pytest.raises(InputError):
        RateExperimentConfig(**{**ok, "reps": 1})
    with pytest.raises(InputError):
        RateExperimentConfig(**{**ok, "alpha": 0.0})
    with pytest.raises(InputError):
        RateExperimentConfig(**{**ok, "grid_step_divisor": 0})


def test_fit_rate_exact_lines():
    slope, intercept, r2 = fit_rate([(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)])
    assert slope == pytest.approx(1.0, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    slope, _, r2 = fit_rate([(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)])
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    # flat ordinate: zero slope, and the perfect fit counts as r^2 = 1
    slope, _, r2 = fit_rate([(1.0, 3.0), (10.0, 3.0)])
    assert slope == pytest.approx(0.0, abs=1e-12)
    assert r2 == 1.0


def test_fit_rate_rejects_bad_points():
    with pytest.raises(InputError):
        fit_rate([(1.0, 1.0)])
    with pytest.raises(InputError):
        fit_rate([(1.0, 1.0), (-2.0, 2.0)])
    with pytest.raises(InputError):
        fit_rate([(1.0, 0.0), (2.0, 2.0)])


def test_ks_normal_detects_point_mass():
    res = ks_normal(np.zeros(100))
    assert res.statistic == pytest.approx(0.5, abs=1e-12)
    assert res.p_value < 1e-10
    with pytest.raises(InputError):
        ks_normal(np.zeros(49))


def test_ks_accepts_true_law():
    rng = np.random.default_rng(404)
    assert ks_normal(rng.standard_normal(2000)).p_value > 0.01
    assert ks_uniform(rng.random(2000) * 0.01, 0.01).p_value > 0.01
    res = ks_two_sample(rng.standard_normal(1500), rng.standard_normal(1500))
    assert res.p_value > 0.01


def test_ks_rejects_shifted_sample():
    rng = np.random.default_rng(405)
    res = ks_two_sample(rng.standard_normal(1500), rng.standard_normal(1500) + 1.0)
    assert res.p_value < 1e-6
    with pytest.raises(InputError):
        ks_uniform(rng.random(100), 0.0)


def test_covariance_check_validation_and_degenerate_point():
    rng = np.random.default_rng(31)
    with pytest.raises(InputError):
        covariance_check(LAW, 2.0, 10, 0.7, 0.5, 200, rng)
    with pytest.raises(InputError):
        covariance_check(LAW, 2.0, 10, 0.2, 0.5, 99, rng)
    # s = 0 pins every product at zero, matching min(0, t) exactly
    res = covariance_check(LAW, 2.0, 10, 0.0, 1.0, 100, rng)
    assert res.statistic == 0.0
    assert res.p_value == 1.0


def test_covariance_check_matches_min():
    rng = np.random.default_rng(67)
    res = covariance_check(LAW, 2.0, 10, 0.5, 1.0, 400, rng)
    assert res.p_value > 0.01
    assert abs(res.statistic - 0.5) < 0.2
    assert res.sample_size == 400


def _small_cfg(**over):
    base = dict(law=LAW, k=2.0, n_grid=(4, 8), reps=10, master_seed=42)
    base.update(over)
    return RateExperimentConfig(**base)


def test_rate_experiment_smoke():
    result = run_rate_experiment(_small_cfg())
    assert result.complete
    assert [row.n for row in result.rows] == [4, 8]
    assert result.rows[0].median_j > result.rows[1].median_j
    # auto alpha anchors the first scale at its own median: half exceed
    assert result.rows[0].exceedance == 0.5
    assert result.threshold(4) == pytest.approx(result.alpha * rate_scale(4, 2.0), rel=1e-12)
    assert result.max_bound_gap <= 0.0
    assert result.max_skeleton_err < 1e-12
    assert result.max_slope_err < 1e-10
    assert math.isfinite(result.slope) and math.isfinite(result.r_squared)
    for row in result.rows:
        assert row.mean_j >= row.median_j * 0.3
        assert min(row.mean_j1, row.mean_j2, row.mean_j3, row.mean_j4) > 0.0


def test_rate_experiment_deterministic_across_workers():
    a = run_rate_experiment(_small_cfg())
    b = run_rate_experiment(_small_cfg())
    c = run_rate_experiment(_small_cfg(), workers=2)
    assert a.rows == b.rows == c.rows
    assert a.alpha == b.alpha == c.alpha
    assert a.slope == c.slope


def test_rate_experiment_fixed_alpha_and_single_scale():
    result = run_rate_experiment(_small_cfg(n_grid=(4,), alpha=1.0, reps=4))
    assert len(result.rows) == 1
    assert result.alpha == 1.0
    assert math.isnan(result.slope) and math.isnan(result.r_squared)


def test_rate_experiment_budget_paths():
    # too small for even the first scale's walk
    with pytest.raises(BudgetError):
        run_rate_experiment(_small_cfg(max_grid_steps=100))
    # enough for n=4 but not the n=8 walk: partial result, honestly flagged
    result = run_rate_experiment(_small_cfg(max_grid_steps=80_000))
    assert not result.complete
    assert [row.n for row in result.rows] == [4]
    assert math.isnan(result.slope)


def test_mean_extreme_segment_move():
    # durations are uniform on (0, time_scale], so the largest of the N
    # segment moves has mean (time_scale/normalizer) * N / (N + 1)
    result = run_rate_experiment(_small_cfg(n_grid=(16,), reps=50, master_seed=7))
    n = 16
    beta = n ** -2.0
    normalizer = math.sqrt(2.0) / (math.sqrt(3.0) * n)
    count = 2 * n * n + 1
    expected = (beta / normalizer) * count / (count + 1)
    spread = (beta / normalizer) * math.sqrt(count / ((count + 1) ** 2 * (count + 2)))
    assert abs(result.rows[0].mean_j4 - expected) < 4 * spread / math.sqrt(50) + 1e-5


def test_trace_shapes_and_validation():
    trace = as_trace(LAW, 2.0, [4], 3, master_seed=1)
    assert trace.j.shape == (3, 1)
    assert trace.frac_monotone == 1.0
    assert trace.frac_final_below_first == 1.0
    with pytest.raises(InputError):
        as_trace(LAW, 2.0, [], 3, master_seed=1)
    with pytest.raises(InputError):
        as_trace(LAW, 2.0, [8, 4], 3, master_seed=1)
    with pytest.raises(InputError):
        as_trace(LAW, 2.0, [4, 8], 0, master_seed=1)


def test_trace_trend_and_determinism():
    trace = as_trace(LAW, 2.0, [4, 16], 30, master_seed=5)
    again = as_trace(LAW, 2.0, [4, 16], 30, master_seed=5)
    assert np.array_equal(trace.j, again.j)
    assert np.all(trace.j > 0.0)
    assert trace.frac_final_below_first >= 0.5
    assert 0.0 <= trace.frac_monotone <= trace.frac_final_below_first
