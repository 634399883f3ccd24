import numpy as np
import pytest

from nlsdelta.core import Field, default_grid, make_grid
from nlsdelta.effective import (amplitude_diagnostic, fast_period, integrate_soliton_ode,
                                local_maxima, period_estimate)
from nlsdelta.errors import ConfigurationError, InsufficientDataError
from nlsdelta.pde import EvolveConfig, evolve


def test_free_motion():
    s = integrate_soliton_ode(-3.0, 0.0, 0.0, 10.0, dt=0.01)
    assert np.all(s.a == -3.0) and np.all(s.v == 0.0)
    assert np.allclose(s.gamma, s.t / 2, atol=1e-12)
    s = integrate_soliton_ode(-3.0, 0.2, 0.0, 10.0, dt=0.01)
    assert np.allclose(s.a, -3 + 0.2 * s.t, atol=1e-12)


def test_step_validation():
    with pytest.raises(ConfigurationError):
        integrate_soliton_ode(-3, 0, 0.05, 10, dt=0.02)
    with pytest.raises(ConfigurationError):
        integrate_soliton_ode(-3, 0, 0.05, 10, dt=0.0)


def test_energy_conservation():
    q = 0.05
    s = integrate_soliton_ode(-3.0, 0.0, q, 200.0, dt=1e-3, stride=100)
    e = s.energy(q)
    assert np.max(np.abs(e - e[0])) < 1e-8


def test_rk4_order():
    # a fast trajectory, so the step error stays above round-off
    end = [np.array([s.a[-1], s.v[-1], s.gamma[-1]]) for s in
           (integrate_soliton_ode(-1.0, 2.0, 2.0, 10.0, dt=dt, stride=10**9) for dt in (0.01, 0.005, 0.0025))]
    r = np.linalg.norm(end[0] - end[1]) / np.linalg.norm(end[1] - end[2])
    assert 12 < r < 20


def test_trapped_oscillation_and_period_scaling():
    periods = []
    for q in (0.2, 0.1):
        s = integrate_soliton_ode(-3.0, 0.0, q, 800.0, dt=0.01, stride=10)
        # attractive impurity: the center swings between -3 and 3
        assert s.a.min() == pytest.approx(-3.0, abs=1e-6) and s.a.max() == pytest.approx(3.0, abs=1e-3)
        periods.append(period_estimate(s.a, s.t))
    assert periods[1] / periods[0] == pytest.approx(np.sqrt(2), rel=0.02)


def test_repulsive_impurity_reflects():
    s = integrate_soliton_ode(-3.0, 0.1, -0.05, 100.0, dt=0.01, stride=10)
    assert s.v[-1] < 0 and s.a.max() < 0


def test_period_estimator():
    t = np.arange(0, 100, 0.05)
    assert period_estimate(np.cos(t / 2), t) == pytest.approx(4 * np.pi, rel=0.005)
    lam = 1.05
    assert period_estimate(np.cos(t * lam**2 / 2), t) == pytest.approx(4 * np.pi / lam**2, rel=0.005)
    with pytest.raises(InsufficientDataError):
        period_estimate(t, t)
    with pytest.raises(ValueError):
        local_maxima(t, t[:-1])


def test_spectral_period():
    t = np.arange(0, 100, 0.05)
    assert fast_period(np.cos(t / 2), t) == pytest.approx(4 * np.pi, rel=0.005)
    noisy = np.cos(t / 2) + 0.3 * np.cos(5 * t) + 0.01 * t
    assert fast_period(noisy, t) == pytest.approx(4 * np.pi, rel=0.005)
    with pytest.raises(InsufficientDataError):
        fast_period(np.cos(t[:10]), t[:10])
    with pytest.raises(InsufficientDataError):
        fast_period(np.cos(t[:200] / 2), t[:200])     # only 10 time units
    with pytest.raises(ValueError):
        fast_period(np.cos(t / 2), t**1.01)


@pytest.fixture(scope="module")
def soliton_series():
    # sampled sech differs from the discrete soliton by O(dx^2): |u| drifts 7.5e-5 at dx = 0.02
    g = make_grid(-40, 40, 8001)
    return evolve(Field(g, 1 / np.cosh(g.x)), EvolveConfig(dt=0.005, t_max=20, record_stride=20, track_center=True))


def test_amplitude_of_exact_soliton(soliton_series):
    A = amplitude_diagnostic(soliton_series)
    assert np.max(np.abs(A)) < 1e-3
    assert np.allclose(amplitude_diagnostic(soliton_series, 60.0), 2 * amplitude_diagnostic(soliton_series, 30.0))


def test_amplitude_needs_center():
    g = default_grid()
    ts = evolve(Field(g, 1 / np.cosh(g.x)), EvolveConfig(dt=0.01, t_max=0.1, record_stride=5))
    with pytest.raises(ConfigurationError):
        amplitude_diagnostic(ts)
