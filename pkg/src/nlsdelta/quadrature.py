"""Oscillatory k-integrals of the form

    int_0^K  a(k) exp(-i t (1+k^2)/2) + b(k) exp(+i t (1+k^2)/2)  dk

by composite Simpson on a piecewise-uniform mesh.  The step is graded near
k = 0 (where amplitudes may vary on a scale `k_scale`) and shrinks with k so
the phase t*k*dk per step stays small.
"""
import numpy as np
from scipy.integrate import simpson

from .errors import AccuracyError

K_MAX = 40.0
MAX_NODES = 8_000_000


def _segment(a, b, h):
    m = max(2, int(np.ceil((b - a) / h)))
    m += m % 2
    return np.linspace(a, b, m + 1)


def graded_segments(t, kmax=K_MAX, k_scale=None, dk_base=None, phase_step=0.25, refine=1):
    """List of uniform k-meshes covering [0, kmax]."""
    tt = max(t, 1.0)
    base = (0.01 / np.sqrt(tt) if dk_base is None else dk_base) / refine
    s0 = 1.0 / np.sqrt(tt)
    if k_scale is not None and k_scale > 0:
        s0 = min(s0, k_scale)
    h0 = min(base, s0 / 10 / refine)
    edges = [0.0, min(10 * s0, kmax)]
    while edges[-1] < kmax:
        edges.append(min(2 * edges[-1], kmax))
    steps = []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        h = h0 if i == 0 else base
        if t > 0:
            h = min(h, phase_step / (t * b) / refine)
        steps.append(h)
    total = sum(int(np.ceil((b - a) / h)) + 2 for a, b, h in zip(edges[:-1], edges[1:], steps))
    if total > MAX_NODES:
        raise AccuracyError(f"t={t:g} needs {total} quadrature nodes for k <= {kmax:g}; "
                            "beyond the supported range")
    return [_segment(a, b, h) for a, b, h in zip(edges[:-1], edges[1:], steps)]


def oscillatory_integral(amp_a, amp_b, t, **mesh):
    """Integrate amp_a(k) e^{-it(1+k^2)/2} + amp_b(k) e^{it(1+k^2)/2} over [0, K].

    amp_a / amp_b are vectorized callables (either may be None).
    """
    total = 0.0 + 0.0j
    for k in graded_segments(t, **mesh):
        ph = np.exp(0.5j * t * (1 + k * k))
        g = np.zeros_like(k, dtype=complex)
        if amp_a is not None:
            g += amp_a(k) * np.conj(ph)
        if amp_b is not None:
            g += amp_b(k) * ph
        total += simpson(g.real, x=k) + 1j * simpson(g.imag, x=k)
    return complex(total)
