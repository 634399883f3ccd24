import time

import numpy as np
import pytest

from nlsdelta.core import default_grid, make_grid
from nlsdelta.errors import ConvergenceError
from nlsdelta.volterra import (MU, THRESHOLD_LIMIT, VolterraState, comparison_table, exact_u2,
                               exact_v, threshold_residual, unit_state, volterra_apply,
                               volterra_apply_direct, volterra_grid, volterra_series)


@pytest.fixture(scope="module")
def series10():
    return volterra_series(10)


def test_state_shape():
    x = volterra_grid(11)
    with pytest.raises(ValueError):
        VolterraState(x, np.zeros((2, 10)))


def test_zero_maps_to_zero():
    x = volterra_grid(101)
    out = volterra_apply(VolterraState(x, np.zeros((2, 101), dtype=complex)))
    assert np.all(out.v == 0)


def test_kernel_vanishes_on_diagonal():
    x = volterra_grid(201)
    for j in (0, 57, 150):
        v = np.zeros((2, 201), dtype=complex)
        v[:, j] = [1.0, 1.0]
        out = volterra_apply(VolterraState(x, v)).v
        assert np.max(np.abs(out[:, j])) < 1e-12


def test_fast_apply_matches_loop():
    x = volterra_grid(400)
    rng = np.random.default_rng(2)
    st = VolterraState(x, rng.standard_normal((2, 400)) + 1j * rng.standard_normal((2, 400)))
    a, b = volterra_apply(st).v, volterra_apply_direct(st).v
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_apply_at_origin_against_gauss_legendre():
    x = volterra_grid(40001)
    j = int(np.flatnonzero(x == 0.0)[0])
    out = volterra_apply(unit_state(x)).v[:, j]
    nodes, weights = np.polynomial.legendre.leggauss(40)
    ref = np.zeros(2)
    for a in np.arange(0, 30, 0.5):
        y = a + 0.25 * (nodes + 1)
        w = 0.25 * weights
        base = -2 * np.cosh(y) ** -2 * np.exp(-MU * y)
        ref += [np.sum(w * base * y), np.sum(w * base * 2 * np.sinh(MU * y) / MU)]
    assert np.max(np.abs(out - ref)) < 1e-6


def test_limit_at_left_end(series10):
    assert abs(series10.state.v[1, 0].real - THRESHOLD_LIMIT) < 1e-3
    assert THRESHOLD_LIMIT == pytest.approx(0.029437, abs=1e-6)


def test_matches_closed_form():
    s = volterra_series(12)
    x = s.state.x
    m = (x >= -5) & (x <= 5)
    assert np.max(np.abs(s.state.v[:, m] - exact_v(x[m]))) <= 1e-4


def test_series_terms_contribute():
    a, b = volterra_series(1, n=2001), volterra_series(2, n=2001)
    assert np.max(np.abs(a.state.v - b.state.v)) > 1e-3


def test_geometric_convergence(series10):
    r = series10.term_norms[3:] / series10.term_norms[2:-1]
    assert np.all(r < 1)
    assert np.max(r[1:]) < 0.8


def test_divergence_detected(monkeypatch):
    import nlsdelta.volterra as vm
    monkeypatch.setattr(vm, "volterra_apply", lambda st: VolterraState(st.x, 2 * st.v))
    with pytest.raises(ConvergenceError):
        vm.volterra_series(10, n=101)


def test_right_end_value(series10):
    assert np.max(np.abs(series10.state.v[:, -1] - [0, 1])) < np.exp(-2 * 30)


def test_resonance_witness(series10):
    x = series10.state.x
    assert np.min(np.abs(series10.state.v[1, x <= -5])) >= 0.02


def test_runtime():
    t0 = time.perf_counter()
    volterra_series(10)
    assert time.perf_counter() - t0 < 10


def test_closed_form_values():
    assert exact_v(-8.0)[1].real == pytest.approx(THRESHOLD_LIMIT, abs=1e-5)
    assert ((MU - 1) / (MU + 1)) ** 2 == pytest.approx(THRESHOLD_LIMIT, abs=1e-15)
    assert exact_u2(0.0)[0].real == pytest.approx(-1 / (1 + MU) ** 2, abs=1e-15)
    x = np.linspace(-3, 3, 13)
    assert np.allclose(exact_u2(x) * np.exp(MU * x), exact_v(x), rtol=1e-13, atol=0)


def test_threshold_residual():
    # relative residual is O(dx^2): 1.3e-4 at dx = 0.02, 3.3e-5 at dx = 0.01
    assert threshold_residual(make_grid(-20, 20, 4001)) <= 1e-4
    assert threshold_residual(default_grid()) <= 2e-4
    coarse = threshold_residual(make_grid(-20, 20, 2001))
    fine = threshold_residual(make_grid(-20, 20, 4001))
    assert 3.5 < coarse / fine < 4.5


def test_comparison_table(series10):
    tab = comparison_table(series10, samples=100)
    assert tab.shape == (100, 5)
    assert tab[0, 0] == -10.0 and tab[-1, 0] == 30.0
