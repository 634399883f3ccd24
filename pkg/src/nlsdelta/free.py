"""Free (q = 0) linearized operator: Kaup's explicit eigenfunctions, the
generalized kernel, the continuous-spectrum propagator at the origin and its
stationary-phase limit, the h-family breathing prediction, and the
non-normal two-level toy model.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .quadrature import K_MAX, oscillatory_integral

SQ2PI = np.sqrt(2 * np.pi)


# Kaup basis -----------------------------------------------------------------

def kaup_state(x, k):
    """Psi_+(x, k) = [(tanh x - ik)^2, -sech^2 x] e^{ikx}; shape (2, len(x))."""
    x = np.asarray(x, dtype=float)
    e = np.exp(1j * k * x)
    return np.array([(np.tanh(x) - 1j * k) ** 2 * e, -np.cosh(x) ** -2 * e + 0j])


def kaup_minus(x, k):
    return kaup_state(x, k)[::-1]


def kaup_dual(x, k):
    """phi_+ = sigma_3 Psi_+."""
    return kaup_state(x, k) * np.array([[1], [-1]])


def kaup_normalized(x, k):
    """v_+ = Psi_+ / (1 + i|k|)^2."""
    return kaup_state(x, k) / (1 + 1j * abs(k)) ** 2


def transmission(k):
    return (1 - 1j * k) ** 2 / (1 + 1j * k) ** 2


# generalized kernel -----------------------------------------------------------

def kernel_basis(x):
    """Psi_1..Psi_4 = i^{j-1} U(e_j . sech) as arrays of shape (4, 2, len(x)).

    U[a, b] = ([a - ib, a + ib]) / sqrt 2 on the real/imaginary parts.
    """
    x = np.asarray(x, dtype=float)
    eta = 1 / np.cosh(x)
    deta = -np.tanh(x) * eta
    g = eta + x * deta
    r2 = np.sqrt(2)
    psi1 = np.array([-deta, -deta]) / r2 + 0j
    psi2 = np.array([x * eta, -x * eta]) / r2 + 0j
    psi3 = 1j * np.array([eta, -eta]) / r2
    psi4 = -1j * np.array([g, g]) / r2
    return np.array([psi1, psi2, psi3, psi4])


def kernel_dual(x):
    """phi_j = sigma_3 Psi_j (same convention as phi_+ for the continuum)."""
    return kernel_basis(x) * np.array([1, -1])[None, :, None]


def pairing(phi, psi, dx):
    """int phi^* psi with the sesquilinear C^2 product."""
    return np.trapezoid(np.sum(np.conj(phi) * psi, axis=0), dx=dx)


def discrete_projection(upper, lower, grid):
    """P_d [upper, lower] onto span{Psi_1..Psi_4} along the continuous subspace."""
    psi = kernel_basis(grid.x)
    phi = kernel_dual(grid.x)
    u = np.array([upper, lower])
    G = np.array([[pairing(phi[j], psi[i], grid.dx) for i in range(4)] for j in range(4)])
    b = np.array([pairing(phi[j], u, grid.dx) for j in range(4)])
    c = np.linalg.solve(G, b)
    return np.tensordot(c, psi, axes=1)


def continuous_projection(upper, lower, grid, kmax=15.0, dk=0.01):
    """P_c u from the Kaup eigenfunction expansion (no kernel subtraction).

    (1/2pi) int [Psi_+ <phi_+, u> - Psi_- <phi_-, u>] dk / (1+k^2)^2 over |k| <= kmax;
    the minus sign comes from the sigma_3 pairing of Psi_- with itself.
    """
    x = grid.x
    t, s2 = np.tanh(x), np.cosh(x) ** -2
    u = np.array([upper, lower], dtype=complex)
    ks = np.linspace(-kmax, kmax, 2 * int(round(kmax / dk)) + 1)
    wk = np.full(len(ks), ks[1] - ks[0])
    wk[[0, -1]] *= 0.5
    out = np.zeros((2, grid.n), dtype=complex)
    for i in range(0, len(ks), 200):
        k = ks[i:i + 200, None]
        e = np.exp(1j * k * x)
        a, b = (t - 1j * k) ** 2 * e, -s2 * e       # Psi_+ = [a, b], Psi_- = [b, a]
        cp = np.trapezoid(np.conj(a) * u[0] - np.conj(b) * u[1], dx=grid.dx, axis=1)
        cm = np.trapezoid(np.conj(b) * u[0] - np.conj(a) * u[1], dx=grid.dx, axis=1)
        w = wk[i:i + 200] / (1 + ks[i:i + 200] ** 2) ** 2
        out[0] += (w * cp) @ a - (w * cm) @ b
        out[1] += (w * cp) @ b - (w * cm) @ a
    return out / (2 * np.pi)


# spectral transform --------------------------------------------------------------

@dataclass(frozen=True)
class SpectralSamples:
    k: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.k) != len(self.values):
            raise ValueError("k and values differ in length")
        if len(self.k) > 1 and not np.all(np.diff(self.k) > 0):
            raise ValueError("k must be strictly increasing")

    def interpolant(self):
        re = CubicSpline(self.k, self.values.real)
        im = CubicSpline(self.k, self.values.imag)
        kmax = self.k[-1]

        def f(k):
            k = np.asarray(k)
            out = re(k) + 1j * im(k)
            return np.where(k <= kmax, out, 0.0)
        return f


def master_kgrid(kmax=K_MAX, q=0.0, dk=0.01):
    parts = []
    lo = 0.0
    if q:
        lo = min(20 * abs(q), 1.0)
        parts.append(np.linspace(0.0, lo, 401)[:-1])
    parts.append(np.arange(lo, kmax + dk / 2, dk))
    return np.concatenate(parts)


def free_f_transform(w0, kgrid, chunk=256):
    """f(k) = 1/(sqrt(2pi)(1-i|k|)^2) int (1 + 2ik tanh x - k^2) w0 e^{-ikx} dx.

    The bracket is conj(a) - conj(b) for v_+ = Psi_+/(1+i|k|)^2, i.e.
    (tanh x + ik)^2 + sech^2 x.
    """
    x = w0.grid.x
    t = np.tanh(x)
    kgrid = np.asarray(kgrid, dtype=float)
    out = np.empty(len(kgrid), dtype=complex)
    for i in range(0, len(kgrid), chunk):
        k = kgrid[i:i + chunk, None]
        integrand = (1 + 2j * k * t - k**2) * w0.values * np.exp(-1j * k * x)
        out[i:i + chunk] = np.trapezoid(integrand, dx=w0.grid.dx, axis=1)
    out /= SQ2PI * (1 - 1j * np.abs(kgrid)) ** 2
    return SpectralSamples(kgrid, out)


def _free_amplitudes(fk):
    def a(k):
        return -k**2 / (1 + 1j * k) ** 2 * fk(k)

    def b(k):
        return -1 / (1 + 1j * k) ** 2 * fk(k)
    return a, b


def free_propagator_origin(w0, t, samples=None, refine=1, kmax=K_MAX):
    """[1 0] e^{-itH_0/2} P_c [w0, w0] at x = 0 for even real w0.

    (2/sqrt(2pi)) int_0^inf (a(0,k) e^{-it(1+k^2)/2} + b(0,k) e^{it(1+k^2)/2}) f(k) dk.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if samples is None:
        samples = free_f_transform(w0, master_kgrid(kmax))
    a, b = _free_amplitudes(samples.interpolant())
    return 2 / SQ2PI * oscillatory_integral(a, b, t, kmax=kmax, refine=refine)


def free_stationary_phase(w0, t):
    """-(1/sqrt(2 pi t)) e^{it/2 + i pi/4} int w0."""
    if t < 1:
        raise DomainError("stationary phase term is only meaningful for t >= 1")
    iw = float(np.real(np.trapezoid(w0.values, dx=w0.grid.dx)))
    return -np.exp(0.5j * t + 0.25j * np.pi) * iw / np.sqrt(2 * np.pi * t)


# h-family ----------------------------------------------------------------------

def h_family_initial(x, h):
    """(1+h)/(1+2h) sech(x/(1+2h)); relaxes to the soliton with lam = 1 + O(h^2)."""
    return (1 + h) / (1 + 2 * h) / np.cosh(x / (1 + 2 * h))


def h_family_perturbation(x, h):
    return h_family_initial(x, h) - 1 / np.cosh(x)


def phase_shift(h):
    """Asymptotic phase of the relaxed soliton for the h-family (inverse scattering).

    phi(h) = int_0^inf log(1 + sin^2(pi h)/cosh^2(pi z)) z/(z^2 + (1+2h)^2) dz ~ 0.6 h^2.
    """
    def g(z):
        e = np.exp(-2 * np.pi * z)
        sech2 = 4 * e / (1 + e) ** 2
        return np.log1p(np.sin(np.pi * h) ** 2 * sech2) * z / (z * z + (1 + 2 * h) ** 2)
    return quad(g, 0, np.inf, limit=200)[0]


def free_breathing_prediction(h, t, phase_correction=False):
    """Prediction for e^{-it/2} u(0,t): 1 - e^{i pi/4} sqrt(pi/(2t)) e^{it/2} h.

    With phase_correction the whole expression is rotated by e^{i phi(h)}.
    """
    t = np.asarray(t, dtype=float)
    val = 1 - np.exp(0.25j * np.pi) * np.sqrt(np.pi / (2 * t)) * np.exp(0.5j * t) * h
    if phase_correction:
        val = val * np.exp(1j * phase_shift(h))
    return val


# non-normal toy --------------------------------------------------------------------

def nonnormal_toy(alpha, beta, gamma, x, t):
    g2 = gamma**2
    if not g2 > max(alpha, beta):
        raise DomainError("need gamma^2 > max(alpha, beta)")
    omega = np.sqrt((g2 - alpha) * (g2 - beta))
    sigma = np.sqrt((g2 - alpha) / (g2 - beta))
    ph = t * omega + gamma * np.asarray(x)
    return np.cos(ph) + 1j * sigma * np.sin(ph)
