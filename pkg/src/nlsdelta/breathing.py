"""Continuous-spectrum propagator at the origin for q != 0 and the breathing
prediction for u(0, t).

Leading term used throughout:

    w(0,t) ~ -e^{i(t/2 + pi/4)} int w0 / sqrt(2 pi t),

which is what the k-integral below converges to and what the PDE shows (the
q = 0 reduction is the free stationary-phase term).
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import Field, h1_norm_sq, integrate
from .errors import ConsistencyError, DomainError
from .free import SQ2PI, SpectralSamples, master_kgrid
from .ground_state import GroundStateParams, ground_state_values, project_kernel
from .quadrature import K_MAX, oscillatory_integral
from .scattering import _closed_form, generalized_eigenfunction, threshold_norm, threshold_profile

K_EPS = 1e-12


def _half(w0):
    c = w0.grid.center
    return w0.grid.x[c:], np.real(w0.values[c:])


def half_line_integral(w0):
    """int w0 over R as twice the half-line trapezoid (w0 even)."""
    x, w = _half(w0)
    return 2 * float(np.trapezoid(w, dx=w0.grid.dx))


def _f1_f2(w0, q, k, chunk=256):
    """f1(+k), f1(-k), f2(k) of the half-line transforms (vectorized in k)."""
    x, w = _half(w0)
    dx = w0.grid.dx
    th = np.arctanh(q)
    z = x + th
    t, s2 = np.tanh(z), np.cosh(z) ** -2
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty((3, len(k)), dtype=complex)
    for i in range(0, len(k), chunk):
        kk = k[i:i + chunk, None]
        mu = np.sqrt(2 + kk * kk)
        fp = ((t + 1j * kk) ** 2 + s2) * np.exp(-1j * kk * z) * w
        fm = ((t - 1j * kk) ** 2 + s2) * np.exp(1j * kk * z) * w
        f2 = ((t + mu) ** 2 + s2) * np.exp(-mu * z) * w
        for j, g in enumerate((fp, fm, f2)):
            out[j, i:i + chunk] = np.trapezoid(g, dx=dx, axis=1)
    return out / SQ2PI


def f_even_split(w0, q, k):
    """f(k) for k > 0 from the half-line split (vectorized).

    f = [(1+C) f1(k) + B f1(-k) - (A+D) f2(k)] / (B (1-ik)^2); this is twice
    the expression obtained by dropping the 2/sqrt(2pi) prefactor.
    """
    k = np.maximum(np.atleast_1d(np.asarray(k, dtype=float)), K_EPS)
    A, B, C, D, _, _ = _closed_form(k, q)
    if q == 0:
        A, B, C, D = 0 * k, 1 + 0 * k, 0 * k, 0 * k
    f1p, f1m, f2 = _f1_f2(w0, q, k)
    return ((1 + C) * f1p + B * f1m - (A + D) * f2) / (B * (1 - 1j * k) ** 2)


def f_even_direct(w0, q, k):
    """f(k) = (2/sqrt(2pi)) int_0^inf (conj a_ev - conj b_ev) w0 dx."""
    cs = generalized_eigenfunction(w0.grid, k, q)
    c = w0.grid.center
    g = (np.conj(cs.a_ev[c:]) - np.conj(cs.b_ev[c:])) * np.real(w0.values[c:])
    return 2 / SQ2PI * complex(np.trapezoid(g, dx=w0.grid.dx))


def f_even_transform(w0, k, q, rtol=1e-6):
    if not k > 0:
        raise DomainError("k must be positive")
    split = complex(f_even_split(w0, q, k)[0])
    direct = f_even_direct(w0, q, k)
    scale = max(abs(split), abs(direct), 1e-300)
    if abs(split - direct) > rtol * scale and abs(split - direct) > 1e-15:
        raise ConsistencyError(f"f(k) routes disagree at k={k}: {split} vs {direct}")
    return split


def f_even_samples(w0, q, kgrid=None, kmax=K_MAX):
    if kgrid is None:
        kgrid = master_kgrid(kmax, q)
    return SpectralSamples(np.asarray(kgrid, dtype=float), f_even_split(w0, q, kgrid))


def origin_amplitudes(k, q):
    """a(0,k), b(0,k) of v_+ at the origin for k > 0 (b = b1 + b2)."""
    k = np.maximum(np.asarray(k, dtype=float), K_EPS)
    A, B, C, D, mu, _ = _closed_form(-k, q)
    if q == 0:
        A, B = 0 * k, 1 + 0 * k
    th = np.arctanh(q)
    den = (1 + 1j * k) ** 2 * B
    ekt = np.exp(1j * k * th)
    emt = np.exp(-mu * th)
    a = ((q - 1j * k) ** 2 * ekt + A * (1 - q * q) * emt) / den
    b1 = -ekt / den
    b2 = (q * q * ekt + A * (q + mu) ** 2 * emt) / den
    return a, b1, b2


def w_origin_quadrature(w0, q, t, samples=None, refine=1, kmax=K_MAX, pieces=False):
    """w(0,t) = sqrt(2/pi) int_0^inf (a(0,k) e^{-it(1+k^2)/2} + b(0,k) e^{it(1+k^2)/2}) f(k) dk.

    With pieces=True returns the a-, b1- and b2-integrals separately.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if abs(q) > 0.05:
        raise DomainError("|q| <= 0.05 required")
    if samples is None:
        samples = f_even_samples(w0, q, kmax=kmax)
    fk = samples.interpolant()
    pref = np.sqrt(2 / np.pi)
    mesh = dict(kmax=kmax, k_scale=abs(q) if q else None, refine=refine)

    def amp(i):
        return lambda k: origin_amplitudes(k, q)[i] * fk(k)

    if pieces:
        return (pref * oscillatory_integral(amp(0), None, t, **mesh),
                pref * oscillatory_integral(None, amp(1), t, **mesh),
                pref * oscillatory_integral(None, amp(2), t, **mesh))

    def a_amp(k):
        return origin_amplitudes(k, q)[0] * fk(k)

    def b_amp(k):
        _, b1, b2 = origin_amplitudes(k, q)
        return (b1 + b2) * fk(k)
    return pref * oscillatory_integral(a_amp, b_amp, t, **mesh)


def breathing_asymptotic(w0, q, t):
    """-e^{i(t/2 + pi/4)} int w0 / sqrt(2 pi t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise DomainError("asymptotic term needs t >= 1")
    iw = half_line_integral(w0)
    return -np.exp(1j * (0.5 * t + 0.25 * np.pi)) * iw / np.sqrt(2 * np.pi * t)


@dataclass(frozen=True)
class BreathingPrediction:
    lam: float
    integral_w0: float
    t: np.ndarray
    value: np.ndarray
    error_budget: np.ndarray


def fig1_initial(x, q):
    """sech(x/(1+q))/(1+q)."""
    return 1 / np.cosh(x / (1 + q)) / (1 + q)


def theorem_prediction(u0, q, t, max_h1=0.5):
    """u(0,t) ~ e^{it lam^2/2} (lam - e^{i(lam^2 t/2 + pi/4)} int w0 / sqrt(2 pi t))."""
    from .ground_state import select_lambda_linear
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise DomainError("prediction needs t >= 1")
    g = u0.grid
    w0 = Field(g, u0.values - ground_state_values(g.x, 1.0, q))
    if np.sqrt(h1_norm_sq(w0)) > max_h1:
        raise DomainError("initial data too far from the ground state")
    lam = select_lambda_linear(w0, q)
    iw = half_line_integral(w0)
    ph = lam**2 * t / 2
    inner_part = lam - np.exp(1j * (ph + 0.25 * np.pi)) * iw / np.sqrt(2 * np.pi * t)
    value = np.exp(1j * ph) * inner_part
    budget = abs(q) / t**1.5 + abs(q) ** 1.5 + q * q * t * t
    return BreathingPrediction(float(lam), float(iw), t, value, budget)


# discrete spectrum ---------------------------------------------------------------

def threshold_component(w0, q):
    """Coefficient c and full-line H1 norm of the threshold part c (u1 + u2).

    (The states +-(1 - q^2) contribute the pair u_+ and sigma_1 u_+, whose
    first components add up to c (u1 + u2) with c = int (u1 - u2) w0.)
    """
    if q >= 0:
        return 0.0, 0.0
    nrm = threshold_norm(q)
    u1, u2 = threshold_profile(w0.grid.x, q)
    c = float(np.real(integrate((u1 - u2) * w0.values, w0.grid))) / nrm

    def dens(x):
        xx = np.array([x - 1e-6, x, x + 1e-6])
        a, b = threshold_profile(xx, q)
        s = a + b
        ds = (s[2] - s[0]) / 2e-6
        return s[1] ** 2 + ds**2
    h1 = 2 * quad(dens, 0, np.inf, limit=400)[0]
    return c, abs(c) * np.sqrt(h1)


def project_continuous(w0, q, lam=1.0):
    """P_c w0 = w0 - P_kernel w0 - (q < 0) threshold part.

    The near-zero eigenfunctions are odd and drop out for even w0.
    """
    params = GroundStateParams(lam, q)
    out = w0 - project_kernel(w0, params)
    if q < 0:
        c, _ = threshold_component(w0, q)
        u1, u2 = threshold_profile(w0.grid.x, q)
        out = out - Field(w0.grid, c * (u1 + u2))
    return out
