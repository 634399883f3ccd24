"""Neumann series for the second threshold solution of H_0 u = u.

With v = e^{sqrt2 x} u_2 the equation (H_0 - 1) u_2 = 0 becomes

    v(x) = [0, 1] + int_x^inf K(x, y) v(y) dy,
    K(x, y) = -2 sech^2 y e^{sqrt2 (x-y)} [[2(y-x), (y-x)],
                                           [sinh(sqrt2 (y-x))/sqrt2, 2 sinh(sqrt2 (y-x))/sqrt2]].

(H_0 here is -d^2 + 1 + ..., so the threshold value is 1; with d^2/2 it
would be 1/2.)  The integrals are trapezoid sums over the grid nodes in
[x, x_right].  Both kernel rows are sums of products f(x) g(y), so every
node is obtained from reversed cumulative sums in O(N).
"""
from dataclasses import dataclass

import numpy as np

from .core import apply_hamiltonian, interior_l2
from .errors import ConvergenceError

MU = np.sqrt(2.0)
X_LEFT, X_RIGHT, N_DEFAULT = -10.0, 30.0, 10_000
THRESHOLD_LIMIT = (3 - 2 * MU) / (3 + 2 * MU)


@dataclass(frozen=True)
class VolterraState:
    x: np.ndarray
    v: np.ndarray  # shape (2, N)

    def __post_init__(self):
        if self.v.shape != (2, len(self.x)):
            raise ValueError("v must have shape (2, len(x))")


def volterra_grid(n=N_DEFAULT, x_left=X_LEFT, x_right=X_RIGHT):
    return np.linspace(x_left, x_right, n)


def unit_state(x):
    return VolterraState(x, np.array([np.zeros_like(x), np.ones_like(x)], dtype=complex))


def _tail_trapz(g, dx):
    """T[j] = trapezoid of g over nodes j..N-1 (T[N-1] = 0)."""
    mid = 0.5 * (g[1:] + g[:-1]) * dx
    out = np.zeros_like(g)
    out[:-1] = np.cumsum(mid[::-1])[::-1]
    return out


def volterra_apply(state):
    x, v = state.x, state.v
    dx = x[1] - x[0]
    s = np.cosh(x) ** -2
    f1 = s * (2 * v[0] + v[1])
    f2 = s * (v[0] + 2 * v[1])
    # (y - x) e^{mu(x-y)} = e^{mu x} (y e^{-mu y}) - x e^{mu x} e^{-mu y}
    em, ep = np.exp(-MU * x), np.exp(MU * x)
    row1 = ep * (_tail_trapz(x * em * f1, dx) - x * _tail_trapz(em * f1, dx))
    # sinh(mu(y-x)) e^{mu(x-y)} / mu = (1 - e^{2mu x} e^{-2mu y}) / (2 mu)
    row2 = (_tail_trapz(f2, dx) - ep**2 * _tail_trapz(em**2 * f2, dx)) / (2 * MU)
    return VolterraState(x, -2 * np.array([row1, row2]))


def volterra_apply_direct(state):
    """Node-by-node trapezoid loop (reference implementation, O(N^2))."""
    x, v = state.x, state.v
    out = np.zeros_like(v)
    for j in range(len(x) - 1):
        y = x[j:]
        w = -2 * np.cosh(y) ** -2 * np.exp(MU * (x[j] - y))
        r = y - x[j]
        out[0, j] = np.trapezoid(w * r * (2 * v[0, j:] + v[1, j:]), y)
        out[1, j] = np.trapezoid(w * np.sinh(MU * r) / MU * (v[0, j:] + 2 * v[1, j:]), y)
    return VolterraState(x, out)


@dataclass(frozen=True)
class VolterraSeries:
    state: VolterraState
    term_norms: np.ndarray  # sup norm of K^n [0,1], n = 0..n_terms


def volterra_series(n_terms=10, n=N_DEFAULT, x_left=X_LEFT, x_right=X_RIGHT):
    """Partial sum sum_{j=0}^{n_terms} K^j [0, 1]."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    x = volterra_grid(n, x_left, x_right)
    term = unit_state(x)
    total = term.v.copy()
    norms = [np.max(np.abs(term.v))]
    for j in range(n_terms):
        term = volterra_apply(term)
        total += term.v
        norms.append(np.max(np.abs(term.v)))
        if not np.isfinite(norms[-1]) or (j >= 2 and norms[-1] > norms[-2]):
            raise ConvergenceError(f"Neumann series not contracting at term {j + 1}")
    return VolterraSeries(VolterraState(x, total), np.array(norms))


def exact_u2(x):
    """u_2 = e^{-sqrt2 x} / (1+sqrt2)^2 [-sech^2 x, (tanh x + sqrt2)^2]."""
    x = np.asarray(x, dtype=float)
    pre = np.exp(-MU * x) / (1 + MU) ** 2
    return pre * np.array([-np.cosh(x) ** -2, (np.tanh(x) + MU) ** 2]) + 0j


def exact_v(x):
    """e^{sqrt2 x} u_2 without the overflowing exponentials."""
    x = np.asarray(x, dtype=float)
    return np.array([-np.cosh(x) ** -2, (np.tanh(x) + MU) ** 2]) / (1 + MU) ** 2 + 0j


def comparison_table(series, samples=100):
    """Rows (x, Re v1, Re v2, exact v1, exact v2) at evenly spaced samples."""
    x = series.state.x
    idx = np.linspace(0, len(x) - 1, samples).round().astype(int)
    ex = exact_v(x[idx])
    v = series.state.v[:, idx]
    return np.column_stack([x[idx], v[0].real, v[1].real, ex[0].real, ex[1].real])


def threshold_residual(grid):
    """Relative interior L2 residual of (H_0 - 1) u_2 with the discrete operator."""
    u = exact_u2(grid.x)
    hu, hw = apply_hamiltonian(u[0], u[1], grid, q=0.0, lam=1.0)
    r = np.concatenate([hu - u[0][1:-1], hw - u[1][1:-1]])
    ref = np.concatenate([u[0][1:-1], u[1][1:-1]])
    return interior_l2(r, grid) / interior_l2(ref, grid)
