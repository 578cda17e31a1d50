from __future__ import annotations

import numpy as np
import pytest

from tvlab.harness import (
    TrialReport,
    event_rate,
    failure_rate,
    rate,
    run_trials,
    success_rate,
    trial_rng,
    trial_seed,
    wilson_interval,
)

# Frozen from an independent evaluation of the Wilson formula at z = 1.96.
WILSON_50_OF_100 = (0.40382982859014716, 0.5961701714098528)


def coin(rng):
    x = rng.random()
    return x < 0.7, {"x": x}


def explode_on_odd_draw(rng):
    if rng.integers(2):
        raise RuntimeError("boom")
    return True, {}


def test_wilson_half():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(WILSON_50_OF_100[0], abs=1e-12)
    assert hi == pytest.approx(WILSON_50_OF_100[1], abs=1e-12)


def test_wilson_zero_count_has_positive_upper():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0
    assert 0.0 < hi < 0.05


def test_all_failures_rate():
    reports = [TrialReport(i, 0, False) for i in range(20)]
    est = failure_rate(reports)
    assert est.point == 1.0 and est.upper == 1.0 and est.lower < 1.0
    assert success_rate(reports).point == 0.0


def test_rate_needs_observations():
    with pytest.raises(ValueError):
        event_rate([])
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_rate_as_dict_round_trip():
    est = rate(3, 10)
    assert est.as_dict()["count"] == 3
    assert est.lower <= 0.3 <= est.upper


def test_single_trial():
    reports = run_trials(coin, 1, 5)
    assert len(reports) == 1 and reports[0].index == 0


def test_runs_are_deterministic():
    a = run_trials(coin, 50, 11, "coin")
    b = run_trials(coin, 50, 11, "coin")
    assert a == b


def test_seeds_and_names_separate_streams():
    base = [r.metrics["x"] for r in run_trials(coin, 20, 1, "coin")]
    assert base != [r.metrics["x"] for r in run_trials(coin, 20, 2, "coin")]
    assert base != [r.metrics["x"] for r in run_trials(coin, 20, 1, "other")]


def test_trial_seed_is_128_bit_and_stable():
    seed = trial_seed(7, 3, "x")
    assert 0 <= seed < 2**128
    assert seed == trial_seed(7, 3, "x")
    assert trial_rng(7, 3, "x").random() == trial_rng(7, 3, "x").random()


def test_exceptions_are_recorded_as_failures():
    reports = run_trials(explode_on_odd_draw, 40, 3)
    errors = [r for r in reports if r.error]
    assert errors and all(not r.success and "RuntimeError: boom" in r.error for r in errors)
    assert any(r.success for r in reports)


def test_trial_outcome_depends_only_on_index():
    full = run_trials(coin, 30, 9, "coin")
    for r in full:
        rng = trial_rng(9, r.index, "coin")
        assert coin(rng)[1]["x"] == r.metrics["x"]


def test_workers_match_serial():
    serial = run_trials(coin, 25, 4, "coin", workers=1)
    parallel = run_trials(coin, 25, 4, "coin", workers=2)
    assert serial == parallel
    assert [r.index for r in parallel] == list(range(25))


def test_zero_trials_rejected():
    with pytest.raises(ValueError):
        run_trials(coin, 0, 1)


def test_frequency_matches_probability():
    est = success_rate(run_trials(coin, 4000, 0, "coin"))
    assert est.lower <= 0.7 <= est.upper
    assert np.isclose(est.point, est.count / 4000)
