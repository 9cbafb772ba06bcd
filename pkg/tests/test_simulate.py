import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from retscale.intervals import moment
from retscale.simulate import (CONTINUOUS, PlanError, SimulationPlan, derive_seed, discretize,
                               load_plans, run_discreteness_experiment, run_finite_size_experiment,
                               simulate_intervals)
from retscale.stretchedexp import analytic_moment, params_from_gamma, survival

pos_arrays = st.lists(st.floats(1e-3, 1e4), min_size=1, max_size=100).map(np.array)
resolutions = st.sampled_from([0.1, 0.3, 1.0, 5.0, 7.0, 10.0])


def discretized_moment_oracle(gamma, tau, r, m):
    """Population mu_m of r*K, P(K=k) = D((k-1)r/tau) - D(kr/tau)."""
    p = params_from_gamma(gamma)
    k = np.arange(1, int(5e6 / r) + 1, dtype=float)
    pk = survival(p, (k - 1) * r / tau) - survival(p, k * r / tau)
    mean = np.sum(pk * k * r)
    return np.sum(pk * (k * r) ** m) ** (1 / m) / mean


def test_simulate_exponential_mean():
    x = simulate_intervals(1.0, 10.0, 1_000_000, 4)
    assert abs(x.mean() - 10) < 3 * 10 / math.sqrt(x.size)


def test_simulate_deterministic():
    assert np.array_equal(simulate_intervals(0.3, 5, 100, 9), simulate_intervals(0.3, 5, 100, 9))
    with pytest.raises(ValueError):
        simulate_intervals(0.3, 0, 10, 1)


def test_simulate_moment_scale_free():
    x = simulate_intervals(0.3, 50.0, 1_000_000, 12)
    assert moment(x, 2) == pytest.approx(analytic_moment(params_from_gamma(0.3), 2), rel=0.01)


def test_discretize_examples():
    assert discretize([2.1], 1).tolist() == [3.0]
    assert discretize([5.0], 5).tolist() == [5.0]
    assert discretize([0.01], 10).tolist() == [10.0]
    assert discretize([0.3], 0.1).tolist() == pytest.approx([0.3])
    assert discretize([2.4, 2.6], 1, "round").tolist() == [2.0, 3.0]
    with pytest.raises(ValueError):
        discretize([1.0], 0)


@given(pos_arrays, resolutions)
def test_discretize_idempotent_and_never_shrinks(t, r):
    d = discretize(t, r)
    assert np.array_equal(discretize(d, r), d)
    assert np.all(d >= t)
    assert np.all(d >= r * (1 - 1e-12))
    assert np.all(d - t < r * (1 + 1e-9))
    assert d.mean() >= t.mean()


@pytest.mark.parametrize("tau", [5.0, 30.0])
@pytest.mark.parametrize("m", [0.5, 2.0])
def test_discretized_moments_match_oracle(tau, m):
    x = discretize(simulate_intervals(0.3, tau, 1_000_000, 3), 1.0)
    assert moment(x, m) == pytest.approx(discretized_moment_oracle(0.3, tau, 1.0, m), rel=0.015)


def test_discreteness_direction_and_decay():
    cont = analytic_moment(params_from_gamma(0.3), 0.5)
    gaps = [discretized_moment_oracle(0.3, t, 1.0, 0.5) - cont for t in (5.0, 30.0, 200.0)]
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]
    x = simulate_intervals(0.3, 5.0, 500_000, 8)
    assert moment(discretize(x, 1.0), 0.5) > moment(x, 0.5)


def test_seed_splitting_distinct():
    a = derive_seed(1, "discreteness", 200, 0, 0).generate_state(2)
    b = derive_seed(1, "discreteness", 200, 1, 0).generate_state(2)
    c = derive_seed(1, "finite_size", 200, 0, 0).generate_state(2)
    d = derive_seed(1, "discreteness", 200, 0, 0).generate_state(2)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.array_equal(a, d)


@pytest.mark.parametrize("field,value", [
    ("sizes", []), ("resolutions", []), ("target_mean_taus", []), ("m_values", []),
    ("gamma", 0), ("n_realizations", 0), ("resolutions", [-1]), ("m_values", [0.0]),
    ("fit_range", [100, 10]), ("discretization", "floor"), ("sizes", [1.5]),
])
def test_plan_validation(field, value):
    with pytest.raises(PlanError) as exc:
        SimulationPlan(**{field: value})
    assert exc.value.field == field


def test_load_plans_field_errors(tmp_path):
    p = tmp_path / "plan.json"
    p.write_text(json.dumps({"gamma": 0.3, "finite_size": {"m_values": []}}))
    with pytest.raises(PlanError) as exc:
        load_plans(p)
    assert exc.value.field == "finite_size.m_values"
    with pytest.raises(PlanError):
        load_plans({"gamma": 0.3})
    with pytest.raises(PlanError):
        load_plans({"discreteness": {"bogus": 1}})


SMALL_DISC = SimulationPlan(gamma=0.3, sizes=(20_000,), resolutions=(CONTINUOUS, 1.0, 5.0),
                            n_realizations=3, target_mean_taus=(3.0, 30.0, 300.0),
                            m_values=(0.5, 2.0), rng_seed=5)


def test_discreteness_small_run():
    res = run_discreteness_experiment(SMALL_DISC)
    assert set(res.curves) == {(r, m) for r in (0.0, 1.0, 5.0) for m in (0.5, 2.0)}
    c = res.curves[(0.0, 0.5)]
    assert c.mean_tau.size == 3 and c.source == "simulation"
    assert np.allclose(c.mean_tau, [3, 30, 300], rtol=0.1)
    # snapped intervals have means at least as large as continuous ones
    assert np.all(res.curves[(5.0, 0.5)].mean_tau >= c.mean_tau)
    rows = list(res.rows())
    assert len(rows) == 6 * 3 and rows[0][0] == 0.0


def test_discreteness_deterministic_and_thread_independent():
    a = list(run_discreteness_experiment(SMALL_DISC, workers=1).rows())
    b = list(run_discreteness_experiment(SMALL_DISC, workers=3).rows())
    assert a == b


def test_finite_size_small_run():
    plan = SimulationPlan(gamma=0.3, sizes=(20_000, 200_000), resolutions=(CONTINUOUS,),
                          n_realizations=4, target_mean_taus=(12.0, 20.0, 35.0, 60.0, 90.0, 300.0),
                          m_values=(0.5, 8.0), rng_seed=2)
    rows = run_finite_size_experiment(plan)
    assert [(r.size, r.m) for r in rows] == [(20_000, 0.5), (20_000, 8.0), (200_000, 0.5), (200_000, 8.0)]
    assert all(math.isfinite(r.mean_alpha) and math.isfinite(r.mean_alpha_full) for r in rows)
    assert rows == run_finite_size_experiment(plan, workers=2)
