import math

import pytest

from abmsim.calibrate import BracketError, CalibrationSpec, calibrate_b
from abmsim.sir import SirParams


def linear(b):
    return 20.0 * b, 0.0


def test_linear_stub_converges():
    res = calibrate_b(CalibrationSpec(target=1.6, tol=0.01), evaluate=linear)
    assert res.success
    assert res.b == pytest.approx(0.08, abs=0.01 / 20)
    assert res.distance <= 0.01**2


def test_grid_then_bisection_phases():
    res = calibrate_b(CalibrationSpec(target=1.3, tol=1e-3), evaluate=linear)
    phases = [e.phase for e in res.evaluations]
    assert phases[:11] == ["grid"] * 11
    assert set(phases[11:]) <= {"bisect"}
    lo, hi = res.bracket
    assert lo <= res.b <= hi or math.isclose(res.b, lo) or math.isclose(res.b, hi)


def test_unreachable_target_raises_with_log():
    with pytest.raises(BracketError) as ei:
        calibrate_b(CalibrationSpec(target=10.0), evaluate=linear)
    assert len(ei.value.log) == 11


def test_max_evals_respected():
    res = calibrate_b(CalibrationSpec(target=1.2345, tol=1e-12, max_evals=15), evaluate=linear)
    assert len(res.evaluations) == 15
    assert not res.success


def test_ties_prefer_smaller_b():
    res = calibrate_b(CalibrationSpec(target=0.0, tol=0.01), evaluate=lambda b: (0.0, 0.0))
    assert res.b == 0.0


def test_calibration_settings_validation():
    with pytest.raises(ValueError):
        CalibrationSpec(b_min=0.3, b_max=0.2)
    with pytest.raises(ValueError):
        CalibrationSpec(n_runs=0)


def test_real_estimator_is_monotone_enough_to_bracket():
    res = calibrate_b(CalibrationSpec(target=1.2, n_runs=200, tol=0.1), SirParams())
    assert res.success
    assert 0.0 < res.b < 0.2
    assert res.to_dict()["b_star"] == res.b
