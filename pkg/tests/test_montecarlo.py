import numpy as np
import pytest

from abmsim.montecarlo import (
    Replicate,
    ensemble_moments,
    estimate_r0,
    mc_stability,
    mean_and_se,
    run_ensemble,
    sir_summary,
)
from abmsim.sir import SirParams, run_epidemic
from abmsim.rng import RngStream, SeedSpec


def test_single_run_mean_is_that_run():
    ens = run_ensemble("sir", SirParams(), 1, 40, 3)
    assert np.array_equal(ens.mean_trajectory, ens.runs[0].trajectory)
    assert np.all(ens.variance_trajectory == 0)


def test_moments_match_numpy():
    ens = run_ensemble("sir", SirParams(b=0.1), 30, 40, 3)
    stack = np.stack([r.trajectory for r in ens.runs]).astype(float)
    assert np.allclose(ens.mean_trajectory, stack.mean(axis=0), rtol=0, atol=1e-12)
    assert np.allclose(ens.variance_trajectory, stack.var(axis=0, ddof=1), rtol=0, atol=1e-9)


def test_moments_independent_of_order():
    rng = np.random.default_rng(0)
    trajs = [rng.normal(size=(5, 2)) * 1e8 + rng.normal(size=(5, 2)) for _ in range(40)]
    m1, v1 = ensemble_moments(trajs)
    m2, v2 = ensemble_moments(trajs[::-1])
    assert np.array_equal(m1, m2) and np.array_equal(v1, v2)


def test_run_i_uses_stream_i():
    ens = run_ensemble("sir", SirParams(), 5, 50, 9, first_stream=10)
    for i, r in enumerate(ens.runs):
        assert r.seed == SeedSpec(9, 10 + i)
        assert np.array_equal(r.trajectory, run_epidemic(SirParams(), 50, r.seed).counts)


def test_parallel_equals_serial():
    a = run_ensemble("sir", SirParams(), 24, 60, 4, workers=1)
    b = run_ensemble("sir", SirParams(), 24, 60, 4, workers=3)
    assert np.array_equal(a.mean_trajectory, b.mean_trajectory)
    assert np.array_equal(a.variance_trajectory, b.variance_trajectory)


def test_b_zero_ensemble_goes_extinct():
    ens = run_ensemble("sir", SirParams(b=0.0), 50, 30, 1)
    assert np.all(ens.column("I")[:, 7:] == 0)
    assert np.all(ens.mean_trajectory[7:, 1] == 0)


def test_some_runs_end_with_single_case():
    ens = run_ensemble("sir", SirParams(), 500, 120, 7)
    assert 0 < np.mean(np.array(ens.meta_values("total_infected")) == 1) < 1


def test_estimate_r0_b_zero():
    assert estimate_r0(SirParams(b=0.0), 100, 1) == (0.0, 0.0)


def test_estimate_r0_monotone_in_b():
    lo, _ = estimate_r0(SirParams(b=0.047), 500, 2)
    hi, _ = estimate_r0(SirParams(b=1.0), 500, 2)
    assert hi > 1.6 and hi > lo


def test_estimate_r0_horizon_independent():
    p = SirParams(b=0.1)
    assert estimate_r0(p, 200, 3) == estimate_r0(p, 200, 3, steps=120)


def test_mean_and_se():
    mu, se = mean_and_se([1, 2, 3, 4])
    assert mu == 2.5
    assert se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)


def test_mc_stability():
    assert mc_stability([3.0] * 100, 10, 1e-9) == 10
    assert mc_stability(list(range(100)), 10, 0.01) is None
    s = RngStream(SeedSpec(1))
    vals = [s.uniform01() for _ in range(5000)]
    n = mc_stability(vals, 50, 0.01)
    assert n is not None and n % 50 == 0
    with pytest.raises(ValueError):
        mc_stability(vals, 1, 0.1)


def test_custom_model_runner():
    def runner(params, steps, seed):
        s = RngStream(seed)
        return Replicate(seed, np.array([[s.uniform01()] for _ in range(steps + 1)]), {})

    ens = run_ensemble(runner, None, 4, 3, 1, names=["x"])
    assert ens.names == ("x",) and ens.mean_trajectory.shape == (4, 1)


def test_summary_fields():
    summ = sir_summary(run_ensemble("sir", SirParams(), 50, 120, 7))
    assert summ["n_runs"] == 50
    assert 0 <= summ["extinction_fraction"] <= 1
    assert summ["stream_ids"] == [0, 49]


def test_requires_runs():
    with pytest.raises(ValueError):
        run_ensemble("sir", SirParams(), 0, 10, 1)
