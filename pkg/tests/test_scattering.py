import numpy as np
import pytest

from nlsdelta.core import apply_hamiltonian, default_grid, interior_l2, make_grid
from nlsdelta.errors import DomainError, PoleError
from nlsdelta.free import kaup_normalized
from nlsdelta.scattering import (_closed_form, conormal_coefficient_check, denominator,
                                 eigenstate_near_one, eigenstate_residual, find_B_roots_near_zero,
                                 generalized_eigenfunction, grushin_integrals, large_k_tilde,
                                 mu_of, near_zero_eigenfunction, psi_one_sided, scattering_coeffs,
                                 scattering_coeffs_linsolve, threshold_norm, w_factor)


def _rel(a, b):
    a, b = np.array(a), np.array(b)
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


def test_branch():
    assert mu_of(1.0) == pytest.approx(np.sqrt(3))
    assert mu_of(-2.0).real > 0 and abs(mu_of(-2.0).imag) < 1e-15


def test_special_wavenumber():
    for q in (0.03, -0.05):
        c = scattering_coeffs(1j * q, q)
        assert np.max(np.abs(np.array(c.as_tuple()) - [0, 0, 1, 0])) < 1e-12
        s = scattering_coeffs_linsolve(1j * q, q)
        assert np.max(np.abs(np.array(s.as_tuple()) - [0, 0, 1, 0])) < 1e-12


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_no_impurity(k):
    A, B, C, D, _, _ = _closed_form(k, 0.0)
    assert abs(A) < 1e-15 and abs(B - 1) < 1e-14 and abs(C) < 1e-15 and abs(D) < 1e-15
    s = scattering_coeffs_linsolve(k, 0.0)
    assert np.allclose(s.tilde(), [0, 1, 0, 0], atol=1e-15)


def test_oracle_equivalence():
    rng = np.random.default_rng(0)
    for k, q in zip(rng.uniform(0.1, 5, 50), rng.uniform(-0.05, 0.05, 50)):
        a = scattering_coeffs(k, q).as_tuple()
        b = scattering_coeffs_linsolve(k, q).as_tuple()
        assert _rel(a, b) < 1e-10


def test_large_k():
    k, q = 10.0, 0.01
    c = scattering_coeffs(k, q)
    At, Bt, Ct, Dt = c.tilde()
    lk = large_k_tilde(k, q)
    for got, want in zip((At, Bt - 1, Ct, Dt), lk):
        assert abs(got - want) <= 5 * q * q / k


def test_conjugation_symmetry():
    for k in (0.3, 1.7, 4.0):
        for q in (0.05, -0.02):
            a, b = scattering_coeffs(k, q), scattering_coeffs(-k, q)
            assert _rel(b.as_tuple(), np.conj(a.as_tuple())) < 1e-12


def test_no_real_poles():
    k = np.geomspace(1e-3, 50, 20001)
    for q in (-0.05, -0.01, 0.01, 0.05):
        assert np.min(np.abs(denominator(k, q))) > 0.5


def test_pole_error():
    q = 0.03
    k = -0.5j
    for _ in range(60):
        f = denominator(k, q)
        k -= f / ((denominator(k + 1e-7, q) - f) / 1e-7)
    assert abs(denominator(k, q)) < 1e-14
    with pytest.raises(PoleError):
        scattering_coeffs(k, q)


@pytest.mark.parametrize("q", [0.05, -0.05])
def test_matching_at_origin(q):
    lv, rv, ld, rd = psi_one_sided(0.8, q)
    assert np.max(np.abs(lv - rv)) <= 1e-10
    assert np.max(np.abs((ld - rd) - 2 * q * lv)) <= 1e-10


def test_eigenfunction_residual():
    k, q = 1.3, 0.03
    g = make_grid(-20, 20, 16001)
    cs = generalized_eigenfunction(g, k, q)
    hu, hl = apply_hamiltonian(cs.a, cs.b, g, q=q)
    lam = 1 + k * k
    res = np.hypot(interior_l2(hu - lam * cs.a[1:-1], g), interior_l2(hl - lam * cs.b[1:-1], g))
    assert res <= 1e-4


def test_eigenfunction_free_limit():
    g = make_grid(-10, 10, 201)
    for k in (0.6, 2.0):
        cs = generalized_eigenfunction(g, k, 0.0)
        ref = kaup_normalized(g.x, k)
        assert np.max(np.abs(np.array([cs.a, cs.b]) - ref)) < 1e-12


def test_eigenfunction_even_parts():
    g = make_grid(-10, 10, 201)
    cs = generalized_eigenfunction(g, -0.9, 0.02)
    assert np.allclose(cs.a_ev, cs.a_ev[::-1]) and np.allclose(cs.b_ev, cs.b_ev[::-1])
    with pytest.raises(DomainError):
        generalized_eigenfunction(g, 0.0, 0.02)


def test_threshold_eigenstate():
    q = -0.05
    es = eigenstate_near_one(q, default_grid())
    assert es.mu_eig == pytest.approx(1 - q * q)
    assert eigenstate_residual(es) <= 1e-3
    assert es.raw_norm == pytest.approx(threshold_norm(q))
    wide = eigenstate_near_one(q, make_grid(-400, 400, 40001))
    s = wide.state
    pair = np.trapezoid(np.abs(s.upper) ** 2 - np.abs(s.lower) ** 2, dx=s.grid.dx)
    assert pair == pytest.approx(1.0, abs=1e-4)
    x = s.grid.x
    env = np.sqrt(abs(q)) * np.exp(-abs(q * x))
    mag = np.hypot(np.abs(s.upper), np.abs(s.lower))
    assert np.all(mag <= 1.5 * env)


def test_threshold_eigenstate_only_repulsive():
    for q in (0.0, 0.02):
        with pytest.raises(DomainError):
            eigenstate_near_one(q, default_grid())


def test_roots_near_zero():
    roots, eig = find_B_roots_near_zero(0.01)
    targets = sorted([-1j + 0.1j, -1j - 0.1j], key=lambda z: z.imag)
    for r, tgt in zip(sorted(roots, key=lambda z: z.imag), targets):
        assert abs(r - tgt) <= 0.01
    assert sorted(e.real for e in eig) == pytest.approx([-0.2, 0.2], abs=0.01)
    with pytest.raises(DomainError):
        find_B_roots_near_zero(0.2)


def test_root_offset_scaling():
    qs = np.array([1e-4, 1e-3, 1e-2])
    off = [np.mean([abs(r + 1j) for r in find_B_roots_near_zero(q)[0]]) for q in qs]
    slope = np.polyfit(np.log(qs), np.log(off), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.02)


def test_repulsive_roots_give_imaginary_pair():
    _, eig = find_B_roots_near_zero(-0.01)
    assert all(abs(e.real) < 1e-10 for e in eig)
    assert sorted(e.imag for e in eig) == pytest.approx([-0.2, 0.2], abs=0.01)


def test_nonphysical_roots_stay_away():
    for q in (1e-4, 1e-2, 0.05):
        s = np.sqrt(q)
        assert min(abs(w_factor(-1j + sg * 1j * s, q)) for sg in (1, -1)) > 1.0


def test_near_zero_eigenfunctions_are_odd():
    g = default_grid()
    for q in (0.01, -0.01, 0.04):
        for r in find_B_roots_near_zero(q)[0]:
            u = near_zero_eigenfunction(g, q, r)
            even = 0.5 * (u + u[:, ::-1])
            odd = 0.5 * (u - u[:, ::-1])
            assert np.linalg.norm(even) <= np.sqrt(abs(q)) * np.linalg.norm(odd)


def test_conormal_checks():
    rep = conormal_coefficient_check(0.5, 0.02)
    assert rep.a_over_b <= 5 * 0.02 and rep.ok
    rep = conormal_coefficient_check(20.0, 0.02)
    B = scattering_coeffs(20.0, 0.02).tilde()[1]
    assert abs(1 / B - 1) <= 5 * (0.02 / 20 + 1 / 400)
    assert rep.ok
    assert conormal_coefficient_check(1.3, 0.0).r1 == 0.0
    with pytest.raises(DomainError):
        conormal_coefficient_check(-1.0, 0.02)


def test_conormal_sweep():
    for k in np.geomspace(0.01, 30, 25):
        for q in (-0.05, -0.01, 0.01, 0.05):
            assert conormal_coefficient_check(k, q).ok


def test_threshold_integrals():
    beta, gamma = grushin_integrals()
    assert beta == pytest.approx(1.0, abs=1e-12)
    assert abs(gamma) < 1e-12
