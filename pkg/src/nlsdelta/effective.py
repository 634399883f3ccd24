"""Effective soliton dynamics near the impurity and the fast/slow diagnostics.

    a' = v,  v' = q/2 (sech^2)'(a),
    gamma' = 1/2 + v^2/2 + q sech^2 a + q/2 a (sech^2)'(a).

With q > 0 (attractive impurity in i u_t + u_xx/2 + q delta u + |u|^2 u = 0)
the center oscillates about x = 0 with period proportional to q^{-1/2}.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InsufficientDataError


@dataclass(frozen=True)
class SolitonODEState:
    t: np.ndarray
    a: np.ndarray
    v: np.ndarray
    gamma: np.ndarray

    def energy(self, q):
        """v^2/2 - q/2 sech^2 a (conserved by the (a, v) subsystem)."""
        return 0.5 * self.v**2 - 0.5 * q / np.cosh(self.a) ** 2


def _dsech2(a):
    return -2 * np.tanh(a) / np.cosh(a) ** 2


def _rhs(y, q):
    a, v, _ = y
    s2, ds2 = 1 / np.cosh(a) ** 2, _dsech2(a)
    return np.array([v, 0.5 * q * ds2, 0.5 + 0.5 * v * v + q * s2 + 0.5 * q * a * ds2])


def integrate_soliton_ode(a0, v0, q, t_max, dt=1e-3, stride=1):
    """Classical RK4 from (a0, v0, 0); records every `stride` steps."""
    if not 0 < dt <= 1e-2:
        raise ConfigurationError("dt must be in (0, 1e-2]")
    n = int(round(t_max / dt))
    y = np.array([a0, v0, 0.0], dtype=float)
    out = [y.copy()]
    ts = [0.0]
    for i in range(1, n + 1):
        k1 = _rhs(y, q)
        k2 = _rhs(y + 0.5 * dt * k1, q)
        k3 = _rhs(y + 0.5 * dt * k2, q)
        k4 = _rhs(y + dt * k3, q)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if i % stride == 0 or i == n:
            out.append(y.copy())
            ts.append(i * dt)
    out = np.array(out)
    return SolitonODEState(np.array(ts), out[:, 0], out[:, 1], out[:, 2])


def amplitude_diagnostic(series, scale=30.0):
    """scale * (|u(a(t), t)| - 1) from a PDE run that tracked the center."""
    if series.center_amplitude is None:
        raise ConfigurationError("time series has no center track (use track_center=True)")
    return scale * (np.asarray(series.center_amplitude) - 1.0)


def local_maxima(values, times, window=5):
    """Times of interior local maxima after a centered moving average.

    Each maximum is refined by a parabola through the neighbouring samples.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if len(values) != len(times):
        raise ValueError("values and times differ in length")
    if window > 1:
        if len(values) < window + 2:
            raise InsufficientDataError("series too short to smooth")
        s = np.convolve(values, np.ones(window) / window, mode="valid")
        tt = times[window // 2: window // 2 + len(s)]
    else:
        s, tt = values, times
    mid = s[1:-1]
    idx = np.nonzero((mid > s[:-2]) & (mid >= s[2:]))[0] + 1
    peaks = []
    for j in idx:
        a, b, c = s[j - 1], s[j], s[j + 1]
        den = a - 2 * b + c
        off = 0.5 * (a - c) / den if den != 0 else 0.0
        peaks.append(tt[j] + off * (tt[j + 1] - tt[j]))
    return np.array(peaks)


def period_estimate(values, times, window=5):
    """Mean spacing of successive local maxima."""
    peaks = local_maxima(values, times, window)
    if len(peaks) < 3:
        raise InsufficientDataError(f"found {len(peaks)} maxima, need at least 3")
    return float((peaks[-1] - peaks[0]) / (len(peaks) - 1))


def fast_period(values, times, band=(0.2, 3.0), pad=1 << 16):
    """Period of the dominant angular frequency in `band` (periodogram peak).

    A quadratic trend is removed and a Hann window applied first.  Used for
    A(t), whose maxima are split by small radiation ripples.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if len(values) < 16:
        raise InsufficientDataError("series too short for a spectral estimate")
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-6, atol=1e-12):
        raise ValueError("times must be uniformly spaced")
    a = values - np.polyval(np.polyfit(times, values, 2), times)
    power = np.abs(np.fft.rfft(a * np.hanning(len(a)), max(pad, len(a))))
    w = 2 * np.pi * np.fft.rfftfreq(max(pad, len(a)), dt)
    inside = (w >= band[0]) & (w <= band[1])
    if not np.any(inside) or np.max(power[inside]) == 0:
        raise InsufficientDataError("no spectral content in the requested band")
    j = np.flatnonzero(inside)[np.argmax(power[inside])]
    if (times[-1] - times[0]) * w[j] < 4 * np.pi:
        raise InsufficientDataError("record shorter than two fast periods")
    return float(2 * np.pi / w[j])
