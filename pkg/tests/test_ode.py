import numpy as np
import pytest

from abmsim.ode import OdeSirParams, conservation_error, decay_solution, integrate_sir, threshold_number


def rel_err_at_4(dt):
    p = OdeSirParams(0.0, 0.25, 399.0, 1.0)
    traj = integrate_sir(p, dt, 4.0)
    return abs(traj[-1, 2] - decay_solution(1.0, 0.25, 4.0)) / decay_solution(1.0, 0.25, 4.0)


def test_decay_closed_form():
    assert rel_err_at_4(0.1) < 1e-6


def test_fourth_order_convergence():
    e1, e2, e3 = rel_err_at_4(0.4), rel_err_at_4(0.2), rel_err_at_4(0.1)
    assert e1 / e2 >= 12 and e2 / e3 >= 12


def test_conservation_with_transmission():
    p = OdeSirParams(0.5, 0.25, 399.0, 1.0)
    traj = integrate_sir(p, 0.1, 120.0)
    assert conservation_error(traj, p.N) < 1e-9
    assert np.all(np.diff(traj[:, 1]) <= 1e-12)


def test_epidemic_grows_above_threshold():
    p = OdeSirParams(0.5, 0.25, 399.0, 1.0)
    assert threshold_number(p) == 2.0
    traj = integrate_sir(p, 0.1, 60.0)
    assert traj[:, 2].max() > 10


def test_time_grid():
    traj = integrate_sir(OdeSirParams(0.1, 0.1, 9, 1), 0.5, 3.0)
    assert traj.shape == (7, 4)
    assert traj[-1, 0] == pytest.approx(3.0)


@pytest.mark.parametrize("kw", [{"beta": -1}, {"S0": 0, "I0": 0}])
def test_invalid_params(kw):
    base = dict(beta=0.1, gamma=0.1, S0=9, I0=1)
    with pytest.raises(ValueError):
        OdeSirParams(**{**base, **kw})


def test_invalid_step():
    with pytest.raises(ValueError):
        integrate_sir(OdeSirParams(0.1, 0.1, 9, 1), 0.0, 1.0)
