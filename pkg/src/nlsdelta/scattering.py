"""Generalized eigenfunctions of the linearized operator with the delta
impurity: the piecewise ansatz built from Kaup states on each half-line, its
connection coefficients A, B, C, D, the threshold eigenstate for q < 0 and
the eigenvalues near zero.

Branch: mu = sqrt(2 + k^2) is the principal root, so the cuts sit on the
imaginary axis beyond +-i sqrt 2 and mu > 0 for real k.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import Vec2Field, apply_hamiltonian, interior_l2
from .errors import ConvergenceError, DomainError, PoleError

POLE_TOL = 1e-14


def mu_of(k):
    return np.sqrt(2 + np.asarray(k, dtype=complex) ** 2)


@dataclass(frozen=True)
class ScatteringCoeffs:
    k: complex
    q: float
    A: complex
    B: complex
    C: complex
    D: complex
    mu: complex

    @property
    def theta(self):
        return np.arctanh(self.q)

    def tilde(self):
        """Phase-stripped unknowns of the 4x4 system: (A~, B~, C~, D~)."""
        th, k, mu = self.theta, self.k, self.mu
        return (np.exp((1j * k - mu) * th) * self.A, np.exp(2j * k * th) * self.B,
                self.C, np.exp((1j * k - mu) * th) * self.D)

    def as_tuple(self):
        return (self.A, self.B, self.C, self.D)


def denominator(k, q):
    mu = mu_of(k)
    return 1 + q**2 * (-2 + k**2 + 2 * q**2) + 2 * q * (k**2 + q**2) * mu + (k**2 + q**2) * mu**2


def _closed_form(k, q):
    """Vectorized closed forms; k may be an array."""
    k = np.asarray(k, dtype=complex)
    mu = mu_of(k)
    th = np.arctanh(q)
    den = denominator(k, q)
    ph = np.exp((-1j * k + mu) * th)
    A = -2 * ph * q * (1j * k + q) * (-1 + q**2) / den
    B = (np.exp(-2j * k * th) * (k - 1j * q) * (1j + k * (q + mu) - 1j * q * (2 * q + mu))
         * (k * (q + mu) - 1j * (1 + q * mu)) / (k * den))
    C = -1j * q * (-1 + (2 + k**2) * q**2 + 2 * q * (k**2 + q**2) * mu + (k**2 + q**2) * mu**2) / (k * den)
    D = -A
    return A, B, C, D, mu, den


def scattering_coeffs(k, q):
    A, B, C, D, mu, den = _closed_form(k, q)
    if abs(den) < POLE_TOL:
        raise PoleError(f"denominator vanishes at k={k}, q={q}")
    if q == 0:
        A, B, C, D = 0j, 1 + 0j, 0j, 0j
    return ScatteringCoeffs(complex(k), float(q), complex(A), complex(B), complex(C), complex(D), complex(mu))


def system_matrix(k, q):
    mu = complex(mu_of(k))
    p = 1 - q * q
    M = np.array([
        [p, (q - 1j * k) ** 2, (q + 1j * k) ** 2, -p],
        [(q + mu) ** 2, p, p, -(q + mu) ** 2],
        [p, (q - 1j * k) * (mu - q), (q + 1j * k) * (mu - q), p],
        [-(q + mu) * (k * k + q * q), p * (q - 1j * k), p * (q + 1j * k), -(q + mu) * (k * k + q * q)],
    ])
    rhs = q * np.array([4j * k, 0, -2 * (mu - q), -2 * p])
    return M, rhs, mu


def scattering_coeffs_linsolve(k, q):
    """Solve the 4x4 system for (A~, B~ - 1, C~, D~) and undo the phase stripping."""
    M, rhs, mu = system_matrix(k, q)
    if np.linalg.cond(M) > 1e14:
        raise PoleError(f"singular connection matrix at k={k}, q={q}")
    At, Bm, Ct, Dt = np.linalg.solve(M, rhs)
    th = np.arctanh(q)
    ph = np.exp((mu - 1j * k) * th)
    return ScatteringCoeffs(complex(k), float(q), complex(ph * At), complex(np.exp(-2j * k * th) * (Bm + 1)),
                            complex(Ct), complex(ph * Dt), complex(mu))


def large_k_tilde(k, q):
    """Leading large-k behaviour of (A~, B~ - 1, C~, D~)."""
    mu = complex(mu_of(k))
    c = q / (1 + k * k) ** 2
    return (c * (2j * k + 2 * mu), c * (-3j / k - 3j * k * mu**2),
            c * (3j / k - 1j * k * mu**2), c * (-2j * k + 2 * mu))


# eigenfunctions ---------------------------------------------------------------

def psi_ansatz(x, k, q, coeffs=None):
    """psi(x, k) from the piecewise ansatz; returns shape (2, len(x))."""
    x = np.asarray(x, dtype=float)
    c = coeffs if coeffs is not None else scattering_coeffs(k, q)
    A, B, C, D = c.as_tuple()
    mu, th = c.mu, np.arctanh(q)
    left = x < 0
    z = x + np.where(left, -th, th)
    s2, t = np.cosh(z) ** -2, np.tanh(z)
    out = np.zeros((2, len(x)), dtype=complex)
    zl, sl, tl = z[left], s2[left], t[left]
    el, em = np.exp(1j * k * zl), np.exp(mu * zl)
    out[0, left] = (tl - 1j * k) ** 2 * el - A * sl * em
    out[1, left] = -sl * el + A * (tl - mu) ** 2 * em
    r = ~left
    zr, sr, tr = z[r], s2[r], t[r]
    ep, en, ed = np.exp(1j * k * zr), np.exp(-1j * k * zr), np.exp(-mu * zr)
    out[0, r] = B * (tr - 1j * k) ** 2 * ep + C * (tr + 1j * k) ** 2 * en - D * sr * ed
    out[1, r] = -B * sr * ep - C * sr * en + D * (tr + mu) ** 2 * ed
    return out


def psi_one_sided(k, q, coeffs=None):
    """Values and x-derivatives of psi at 0- and 0+ (analytic)."""
    c = coeffs if coeffs is not None else scattering_coeffs(k, q)
    A, B, C, D = c.as_tuple()
    mu, th = c.mu, np.arctanh(q)

    def parts(z, kk, m_sign):
        # values/derivatives of [(t - i kk)^2, -s^2] e^{i kk z} and
        # [-s^2, (t + m_sign mu)^2] e^{-m_sign mu z}
        t, s2 = np.tanh(z), np.cosh(z) ** -2
        e = np.exp(1j * kk * z)
        f1 = np.array([(t - 1j * kk) ** 2, -s2]) * e
        df1 = np.array([2 * (t - 1j * kk) * s2 + 1j * kk * (t - 1j * kk) ** 2,
                        2 * s2 * t - 1j * kk * s2]) * e
        em = np.exp(-m_sign * mu * z)
        g = np.array([-s2, (t + m_sign * mu) ** 2]) * em
        dg = np.array([2 * s2 * t - m_sign * mu * (-s2),
                       2 * (t + m_sign * mu) * s2 - m_sign * mu * (t + m_sign * mu) ** 2]) * em
        return f1, df1, g, dg

    fL, dfL, gL, dgL = parts(-th, k, -1)
    left_v, left_d = fL + A * gL, dfL + A * dgL
    fB, dfB, gD, dgD = parts(th, k, +1)
    fC, dfC, _, _ = parts(th, -k, +1)
    right_v = B * fB + C * fC + D * gD
    right_d = B * dfB + C * dfC + D * dgD
    return left_v, right_v, left_d, right_d


@dataclass(frozen=True)
class ContinuumState:
    """v_+(x,k) = [a, b] and its even parts on a grid."""
    grid: object
    k: float
    q: float
    a: np.ndarray
    b: np.ndarray
    a_ev: np.ndarray
    b_ev: np.ndarray

    def as_field(self):
        return Vec2Field(self.grid, self.a, self.b)


def generalized_eigenfunction(grid, k, q):
    """v_+(x,k): psi(-x,-k)/((1+ik)^2 B(-k)) for k > 0, psi(x,k)/((1-ik)^2 B(k)) for k < 0."""
    if k == 0:
        raise DomainError("k must be nonzero")
    x = grid.x
    if k > 0:
        c = scattering_coeffs(-k, q)
        if abs(c.B) < 1e-12:
            raise PoleError("B(-k) vanishes")
        v = psi_ansatz(-x, -k, q, c) / ((1 + 1j * k) ** 2 * c.B)
    else:
        c = scattering_coeffs(k, q)
        if abs(c.B) < 1e-12:
            raise PoleError("B(k) vanishes")
        v = psi_ansatz(x, k, q, c) / ((1 - 1j * k) ** 2 * c.B)
    a, b = v
    return ContinuumState(grid, float(k), float(q), a, b, 0.5 * (a + a[::-1]), 0.5 * (b + b[::-1]))


# threshold eigenstate ---------------------------------------------------------------

@dataclass(frozen=True)
class EigenstateNearOne:
    q: float
    mu_eig: float
    state: Vec2Field
    raw_norm: float


def threshold_profile(x, q):
    """Unnormalized eigenstate at 1 - q^2 (q < 0): components (u1, u2)."""
    th = np.arctanh(q)
    z = np.abs(x) + th
    e = np.exp(q * z)
    r = np.sqrt(abs(q))
    m = np.exp(-2 * np.abs(z))
    sech2 = 4 * m / (1 + m) ** 2
    return r * (np.tanh(z) - q) ** 2 * e, -r * sech2 * e


def threshold_norm(q):
    """int (u1^2 - u2^2) over the whole line (the sigma_3 pairing)."""
    def g(x):
        u1, u2 = threshold_profile(np.array([x]), q)
        return float(u1[0] ** 2 - u2[0] ** 2)
    return 2 * quad(g, 0, np.inf, limit=400)[0]


def eigenstate_near_one(q, grid):
    """Eigenstate of H_q at 1 - q^2, normalized on the whole line (not the box)."""
    if q >= 0:
        raise DomainError("no eigenvalue near the threshold for q >= 0")
    up, lo = threshold_profile(grid.x, q)
    norm = threshold_norm(q)
    c = 1 / np.sqrt(norm)
    return EigenstateNearOne(float(q), 1 - q * q, Vec2Field(grid, c * up, c * lo), norm)


def eigenstate_residual(es, lam=1.0):
    g = es.state.grid
    hu, hl = apply_hamiltonian(es.state.upper, es.state.lower, g, es.q, lam)
    ru = hu - es.mu_eig * es.state.upper[1:-1]
    rl = hl - es.mu_eig * es.state.lower[1:-1]
    return float(np.hypot(interior_l2(ru, g), interior_l2(rl, g)))


# roots near zero ---------------------------------------------------------------

def v_factor(k, q):
    mu = mu_of(k)
    return (1j + k * mu) + q * (k - 1j * mu) - 2j * q * q


def w_factor(k, q):
    mu = mu_of(k)
    return (-1j + k * mu) + q * (k - 1j * mu)


def _dv(k, q):
    mu = mu_of(k)
    dmu = k / mu
    return mu + k * dmu + q * (1 - 1j * dmu)


def _newton(k, q, tol=1e-12, maxiter=60):
    for _ in range(maxiter):
        f = v_factor(k, q)
        if abs(f) < tol:
            return complex(k)
        k = k - f / _dv(k, q)
    if abs(v_factor(k, q)) < tol:
        return complex(k)
    raise ConvergenceError(f"Newton did not converge for the B-root at q={q}")


def _grid_search(seed, q, radius, n=81):
    re = np.linspace(seed.real - radius, seed.real + radius, n)
    im = np.linspace(seed.imag - radius, seed.imag + radius, n)
    K = re[None, :] + 1j * im[:, None]
    j = np.unravel_index(np.argmin(np.abs(v_factor(K, q))), K.shape)
    return K[j]


def find_B_roots_near_zero(q):
    """Both roots of v(k) near k = -i; eigenvalues of H_q are 1 + k^2."""
    if not 0 < abs(q) <= 0.05:
        raise DomainError("need 0 < |q| <= 0.05")
    s = np.sqrt(complex(q))
    roots = []
    for sign in (+1, -1):
        seed = -1j + sign * 1j * s
        try:
            r = _newton(seed, q)
        except ConvergenceError:
            r = _newton(_grid_search(seed, q, 2 * abs(s)), q)
        roots.append(r)
    eig = [complex(1 + r * r) for r in roots]
    return roots, eig


def near_zero_eigenfunction(grid, q, root):
    """psi at a root of B: an L2 eigenfunction (B = 0 kills the growing piece)."""
    A, B, C, D, mu, den = _closed_form(root, q)
    c = ScatteringCoeffs(complex(root), float(q), complex(A), 0j, complex(C), complex(D), complex(mu))
    return psi_ansatz(grid.x, root, q, c)


# conormal structure ----------------------------------------------------------------

@dataclass(frozen=True)
class ConormalReport:
    k: float
    q: float
    r1: float
    r2: float
    a_over_b: float
    d_over_b: float
    bound: float
    ok: bool


CONORMAL_CONST = 5.0


def conormal_coefficient_check(k, q, const=CONORMAL_CONST):
    """Residuals of 1/B ~ k/(k - iq) and C/B ~ iq/(k - iq) (phase-stripped B, C)."""
    if not k > 0:
        raise DomainError("k must be positive")
    c = scattering_coeffs(k, q)
    At, Bt, Ct, Dt = c.tilde()
    r1 = abs(1 / Bt - k / (k - 1j * q))
    r2 = abs(Ct / Bt - 1j * q / (k - 1j * q))
    bound = const * (abs(q) + k * k * min(1.0, 1 / (k * k))) if k <= 1 else const * (abs(q) / k + 1 / k**2)
    ab, db = abs(At / Bt), abs(Dt / Bt)
    ok = r1 <= bound and r2 <= bound and ab <= const * abs(q) and db <= const * abs(q)
    return ConormalReport(float(k), float(q), float(r1), float(r2), float(ab), float(db), float(bound), bool(ok))


def grushin_integrals():
    """beta = 6 int sech^4 tanh^3 sgn x and gamma = 1 - 2 int sech^4 tanh sgn x (expected 1 and 0)."""
    def sech4(x):
        m = np.exp(-2 * x)
        return (4 * m / (1 + m) ** 2) ** 2
    b = 12 * quad(lambda x: sech4(x) * np.tanh(x) ** 3, 0, np.inf)[0]
    g = 1 - 4 * quad(lambda x: sech4(x) * np.tanh(x), 0, np.inf)[0]
    return b, g
