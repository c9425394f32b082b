import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abmsim.stats import (
    InsufficientDataError,
    PreconditionError,
    autocov,
    classify_equilibrium,
    decay_null_band,
    ergodicity_decay,
    ergodicity_moment_test,
    runs_test,
)


def test_runs_test_hand_example():
    r = runs_test([5, 1, 5, 1, 5, 1], min_length=2)
    assert (r.n1, r.n2, r.runs) == (3, 3, 6)
    assert r.z == pytest.approx(2 / math.sqrt(1.2), abs=1e-12)
    assert r.p_value == pytest.approx(math.erfc(r.z / math.sqrt(2)))


def test_runs_test_constant_is_degenerate():
    r = runs_test([4.0] * 30)
    assert r.degenerate and not r.rejects(0.05)


def test_runs_test_too_short():
    with pytest.raises(InsufficientDataError):
        runs_test(list(range(9)))
    with pytest.raises(InsufficientDataError):
        runs_test([1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 3])


def test_runs_test_drops_median_ties():
    r = runs_test([0, 2, 1, 2, 0, 1, 0, 2, 1, 0, 2, 1, 0, 2, 0, 2])
    assert r.n1 + r.n2 == 12


@given(st.lists(st.integers(-10**6, 10**6), min_size=12, max_size=60, unique=True))
@settings(max_examples=80, deadline=None)
def test_runs_test_invariant_under_monotone_map(xs):
    a = runs_test(xs)
    b = runs_test([x**3 + 7 * x for x in xs])
    assert (a.n1, a.n2, a.runs) == (b.n1, b.n2, b.runs)


def test_runs_test_size_small_sample():
    rng = np.random.default_rng(1)
    rej = np.mean([runs_test(rng.uniform(size=200)).rejects(0.05) for _ in range(2000)])
    assert 0.03 <= rej <= 0.07


def test_alternating_and_trending_series_reject():
    assert runs_test([1, -1] * 50).rejects(0.05)
    assert runs_test(np.arange(100.0)).rejects(0.05)


def test_extinct_tail_is_absorbing_at_zero():
    y = [1, 1, 2, 3, 3, 2, 1, 1, 0] + [0] * 111
    rep = classify_equilibrium(y, 20)
    assert rep.classification == "absorbing" and rep.mean == 0.0
    assert rep.window[1] == len(y)


def test_plateau_then_trend_is_transient():
    rng = np.random.default_rng(3)
    y = np.concatenate([np.arange(20.0) * 2, 40 + rng.normal(size=40), 40 + np.arange(1.0, 61) * 3])
    rep = classify_equilibrium(y, 20)
    assert rep.classification == "transient"
    s, e = rep.window
    assert 20 <= s and e <= 60
    assert rep.mean == pytest.approx(40, abs=1)


def test_monotone_series_has_no_equilibrium():
    assert classify_equilibrium(np.arange(200.0), 20).classification == "none"


def test_constant_tail_of_window_length_is_absorbing():
    y = list(np.arange(100.0)) + [5.0] * 20
    assert classify_equilibrium(y, 20).classification == "absorbing"


def test_window_bounds():
    with pytest.raises(ValueError):
        classify_equilibrium([1.0] * 10, 11)


def test_autocov_examples():
    assert autocov([3.0] * 20, 4) == 0.0
    assert autocov([1, -1] * 50, 1) == pytest.approx(-0.99, abs=1e-12)
    x = np.random.default_rng(0).normal(size=50)
    assert autocov(x, 0) == pytest.approx(np.var(x))
    with pytest.raises(ValueError):
        autocov(x, 50)


def test_decay_of_noise_within_null_band():
    x = np.random.default_rng(5).normal(size=50)
    mean, sd = decay_null_band(50, 10, n_sim=1000)
    assert abs(ergodicity_decay(x, 10) - mean) < 3 * sd


def _noisy(rng, offset=0.0, n=60):
    return [offset + rng.normal(size=n) for _ in range(12)]


def test_moment_test_same_process_passes_mostly():
    rng = np.random.default_rng(8)
    passes = [ergodicity_moment_test(_noisy(rng), _noisy(rng)).passed for _ in range(100)]
    assert np.mean(passes) >= 0.85


def test_moment_test_offset_fails():
    rng = np.random.default_rng(9)
    res = ergodicity_moment_test(_noisy(rng), _noisy(rng, offset=5.0))
    assert not res.passed


def test_moment_test_extinct_tails_pass_trivially():
    zeros = [[2, 1, 0] + [0] * 57 for _ in range(10)]
    assert ergodicity_moment_test(zeros, zeros).passed


def test_moment_test_rejects_nonstationary_input():
    trend = [np.arange(60.0) for _ in range(10)]
    with pytest.raises(PreconditionError):
        ergodicity_moment_test(trend, trend)


def test_moment_test_needs_ten_series():
    with pytest.raises(ValueError):
        ergodicity_moment_test([[0.0] * 30] * 9, [[0.0] * 30] * 10)
