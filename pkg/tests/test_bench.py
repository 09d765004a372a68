import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xtfc.bench import (
    PUBLISHED,
    RunConfig,
    RunReport,
    compare_table,
    log_histogram,
    monte_carlo,
    run_once,
    sweep,
)


@pytest.fixture(scope="module")
def pde1_report():
    return run_once("pde1")


def test_report_invariants(pde1_report):
    r = pde1_report
    assert r.converged and r.iterations == 1
    assert 0 <= r.train_mean_error <= r.train_max_error
    assert 0 <= r.test_mean_error <= r.test_max_error
    assert r.solve_time > 0 and r.total_time >= r.solve_time
    assert r.test_max_error <= 1e-10
    assert (r.neurons, r.points, r.activation, r.weight_range) == (170, [30, 30], "tanh", [-1.0, 1.0])
    assert r.n_train == 900 and r.n_test == 3600


def test_report_round_trip(pde1_report):
    again = RunReport.from_json(pde1_report.to_json())
    assert again == pde1_report
    keys = json.loads(pde1_report.to_json()).keys()
    assert all(k == k.lower() and " " not in k for k in keys)


def test_config_defaults_and_overrides():
    cfg = RunConfig.defaults("ode1", seed=4, neurons=None)
    assert (cfg.neurons, cfg.points, cfg.activation, cfg.seed) == (51, (51,), "logistic", 4)
    assert cfg.tol == pytest.approx(4.440892098500626e-16)


def test_single_point_count_expands():
    r = run_once("pde4", RunConfig.defaults("pde4", points=(8,), neurons=30))
    assert r.points == [8, 8]


def test_wrong_point_count_rejected():
    with pytest.raises(ValueError):
        run_once("pde4", RunConfig.defaults("pde4", points=(8, 8, 8)))


def test_per_output_errors():
    r = run_once("sode2")
    assert len(r.test_max_error_by_output) == 2
    assert r.test_max_error == max(r.test_max_error_by_output)


def test_single_trial_reduces_to_run_once():
    cfg = RunConfig.defaults("pde4", neurons=40, points=(10, 10), seed=12)
    mc = monte_carlo("pde4", cfg, trials=1)
    assert mc.test_max_errors == [run_once("pde4", cfg).test_max_error]
    assert mc.median == mc.test_max_errors[0]


def test_monte_carlo_summary():
    cfg = RunConfig.defaults("ode1", seed=100)
    mc = monte_carlo("ode1", cfg, trials=6)
    assert mc.seeds == list(range(100, 106))
    assert mc.trials == mc.successes + mc.failures == 6
    q = [mc.percentiles[k] for k in ("5", "25", "50", "75", "95")]
    assert q == sorted(q)
    assert sum(mc.hist_counts) == mc.successes
    assert np.allclose(np.diff(mc.hist_edges), 0.5)


def test_monte_carlo_counts_non_convergence():
    cfg = RunConfig.defaults("pde3", max_iter=1, neurons=30, points=(8, 8))
    mc = monte_carlo("pde3", cfg, trials=3)
    assert mc.failures == 3 and mc.successes == 0


def test_monte_carlo_needs_a_trial():
    with pytest.raises(ValueError):
        monte_carlo("ode1", trials=0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-18, 1.0), min_size=1, max_size=50))
def test_histogram_counts_every_error(errors):
    edges, counts = log_histogram(errors)
    assert sum(counts) == len(errors)
    assert len(edges) == len(counts) + 1
    assert np.allclose(np.diff(edges), 0.5)
    assert all(e % 0.5 == 0 for e in edges)
    logs = np.log10(np.maximum(errors, 1e-17))
    assert edges[0] <= logs.min() and logs.max() < edges[-1]


def test_sweep_single_value_equals_monte_carlo():
    cfg = RunConfig.defaults("pde4", neurons=40)
    curve = sweep("pde4", "points", [10], trials=2, config=cfg)
    mc = monte_carlo("pde4", dataclasses.replace(cfg, points=(10, 10)), trials=2)
    assert curve.values == [10]
    assert curve.max_errors == [max(mc.test_max_errors)]


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep("pde1", "points", [20, 10])
    with pytest.raises(ValueError):
        sweep("pde1", "points", [10, 10])
    with pytest.raises(ValueError):
        sweep("pde1", "depth", [1, 2])


def test_neuron_sweep_improves_then_plateaus():
    curve = sweep("pde1", "neurons", [10, 40, 100, 170], trials=1)
    errs = np.log10(curve.max_errors)
    assert errs[0] - errs[-1] >= 3
    assert all(b <= a + 1 for a, b in zip(errs, errs[1:]))


def test_point_sweep_non_increasing_within_one_order():
    curve = sweep("pde1", "points", [10, 15, 20, 25, 30], trials=1)
    errs = np.log10(curve.max_errors)
    assert all(b <= a + 1 for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= errs[0]


def test_compare_constants(pde1_report):
    rows = {r["method"]: r for r in compare_table("pde1", pde1_report)}
    assert rows["FEM"]["test_max_error"] == 1.5e-5
    assert rows["BNN"]["train_max_error"] is None
    assert rows["X-TFC (this run)"]["test_max_error"] == pde1_report.test_max_error
    assert rows["X-TFC (this run)"]["source"].startswith("measured")
    assert {r["source"] for m, r in rows.items() if m != "X-TFC (this run)"} == {"published constant"}
    assert {r[0]: r[2] for r in PUBLISHED["pde2"]}["CNN"] == 3e-3
    assert {r[0]: r[2] for r in PUBLISHED["pde3"]}["ANN"] == 1.5e-5


def test_compare_unknown_problem():
    with pytest.raises(ValueError):
        compare_table("pde4")


@pytest.mark.slow
@pytest.mark.parametrize("pid", ["ode1", "sode2", "pde1", "pde2", "pde3", "pde4", "pde5", "pde6", "pde7"])
def test_thousand_trials_without_failure(pid):
    mc = monte_carlo(pid, RunConfig.defaults(pid), trials=1000)
    assert mc.failures == 0, f"{mc.failures} of 1000 trials failed"
