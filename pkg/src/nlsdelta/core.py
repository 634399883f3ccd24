"""Uniform grids with a node at the origin, sampled fields, and the basic
quadratic forms.

All x-integrals use the trapezoid rule.  The delta at the origin enters every
discrete operator as a spike of weight 1/dx at the center node.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    xmin: float
    xmax: float
    n: int

    @property
    def dx(self):
        return (self.xmax - self.xmin) / (self.n - 1)

    @property
    def center(self):
        return (self.n - 1) // 2

    @cached_property
    def x(self):
        x = self.xmin + self.dx * np.arange(self.n)
        x[self.center] = 0.0
        return x

    def refined(self):
        """Same box, n -> 2n-1 (halves dx, keeps the origin node)."""
        return Grid(self.xmin, self.xmax, 2 * self.n - 1)

    def same_as(self, other):
        return (self.xmin, self.xmax, self.n) == (other.xmin, other.xmax, other.n)


def make_grid(xmin, xmax, n):
    if int(n) != n or n < 3 or n % 2 == 0:
        raise ConfigurationError(f"node count must be odd and >= 3, got {n}")
    if not xmin < xmax:
        raise ConfigurationError(f"need xmin < xmax, got {xmin}, {xmax}")
    if not xmin < 0 < xmax:
        raise ConfigurationError("box must contain the origin in its interior")
    if not np.isclose(xmin, -xmax, rtol=0, atol=1e-12 * max(1.0, abs(xmax))):
        # the center node of an odd grid is at 0 only for a symmetric box
        raise ConfigurationError(f"0 is not a node of [{xmin}, {xmax}] with n={n}; use a symmetric box")
    return Grid(float(xmin), float(xmax), int(n))


DEFAULT_GRID = (-40.0, 40.0, 4001)


def default_grid():
    return make_grid(*DEFAULT_GRID)


@dataclass(frozen=True)
class Field:
    """A complex function sampled on a grid."""
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ConfigurationError(f"field has {v.shape} values, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("field has non-finite entries")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, fn(grid.x))

    def __add__(self, other):
        _check_same(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c):
        return Field(self.grid, c * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def at_origin(self):
        return self.values[self.grid.center]

    def reflected(self):
        return Field(self.grid, self.values[::-1])


@dataclass(frozen=True)
class Vec2Field:
    grid: Grid
    upper: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("upper", "lower"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.shape != (self.grid.n,):
                raise ConfigurationError(f"{name} has {v.shape} values, grid has {self.grid.n} nodes")
            object.__setattr__(self, name, v)

    def stacked(self):
        return np.vstack([self.upper, self.lower])


def _check_same(u, v):
    if not u.grid.same_as(v.grid):
        raise ConfigurationError("fields live on different grids")


def integrate(values, grid):
    return np.trapezoid(values, dx=grid.dx)


def integrate_kinked(values, grid):
    """Trapezoid plus the dx^2 correction for a derivative jump at the origin node.

    For f smooth on each side of 0 the trapezoid error is -dx^2/12 [f'(0+) - f'(0-)];
    the one-sided slopes are taken from three-point differences.
    """
    f, c, dx = np.asarray(values), grid.center, grid.dx
    right = (-3 * f[c] + 4 * f[c + 1] - f[c + 2]) / (2 * dx)
    left = (3 * f[c] - 4 * f[c - 1] + f[c - 2]) / (2 * dx)
    return np.trapezoid(f, dx=dx) + dx**2 / 12 * (right - left)


def centered_diff(values, dx):
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2 * dx)
    d[0] = (values[1] - values[0]) / dx
    d[-1] = (values[-1] - values[-2]) / dx
    return d


def l2_norm_sq(u):
    return float(integrate(np.abs(u.values) ** 2, u.grid))


def h1_norm_sq(u):
    du = centered_diff(u.values, u.grid.dx)
    return l2_norm_sq(u) + float(integrate(np.abs(du) ** 2, u.grid))


def inner(u, v):
    """Real inner product Re int u conj(v)."""
    _check_same(u, v)
    a, b = u.values, v.values
    return float(integrate(a.real * b.real + a.imag * b.imag, u.grid))


def symplectic_form(u, v):
    """Im int u conj(v)."""
    _check_same(u, v)
    a, b = u.values, v.values
    return float(integrate(a.imag * b.real - a.real * b.imag, u.grid))


# discrete operators -------------------------------------------------------

def laplacian_q(grid, q=0.0):
    """Sparse second difference plus 2q*delta on the interior nodes (Dirichlet ends)."""
    m = grid.n - 2
    dx = grid.dx
    main = np.full(m, -2.0 / dx**2)
    main[grid.center - 1] += 2 * q / dx
    off = np.full(m - 1, 1.0 / dx**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csc")


def apply_laplacian_q(f, grid, q=0.0):
    """(d^2 + 2q delta) f at the interior nodes, using the given end values.

    Returns an array of length n-2.
    """
    f = np.asarray(f)
    dx = grid.dx
    out = (f[:-2] - 2 * f[1:-1] + f[2:]) / dx**2
    out[grid.center - 1] += 2 * q / dx * f[grid.center]
    return out


def apply_hamiltonian(upper, lower, grid, q=0.0, lam=1.0, potential=None):
    """Linearized operator H_q applied to a sampled 2-vector, interior nodes.

    H_q = diag(-d^2 + lam^2, d^2 - lam^2) + v^2 [[-4, -2], [2, 4]] - 2q delta diag(1, -1),
    with v the ground state.  Returns (upper, lower) arrays of length n-2.
    """
    if potential is None:
        from .ground_state import ground_state_values
        potential = ground_state_values(grid.x, lam, q)
    v2 = potential[1:-1] ** 2
    lu = apply_laplacian_q(upper, grid, q)
    ll = apply_laplacian_q(lower, grid, q)
    u, w = np.asarray(upper)[1:-1], np.asarray(lower)[1:-1]
    hu = -lu + lam**2 * u - 4 * v2 * u - 2 * v2 * w
    hw = ll - lam**2 * w + 2 * v2 * u + 4 * v2 * w
    return hu, hw


def interior_l2(values, grid):
    """Discrete L2 norm of an interior-node array."""
    return float(np.sqrt(grid.dx * np.sum(np.abs(values) ** 2)))
