"""Ground states lam*sech(lam|x| + atanh(q/lam)), the generalized kernel,
symplectic projections, nonlinear eigenvalue selection and the coercivity
check for the linearized operator.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from .core import Field, integrate, integrate_kinked, symplectic_form
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class GroundStateParams:
    lam: float
    q: float = 0.0

    def __post_init__(self):
        if not self.lam > abs(self.q):
            raise DomainError(f"need lambda > |q|, got lambda={self.lam}, q={self.q}")

    @property
    def theta(self):
        return float(np.arctanh(self.q / self.lam))

    @property
    def mass(self):
        return 2 * (self.lam - self.q)


@dataclass(frozen=True)
class KernelPair:
    v3: Field   # i v_lam
    v4: Field   # d/dlam v_lam


def ground_state_values(x, lam, q=0.0):
    return lam / np.cosh(lam * np.abs(x) + np.arctanh(q / lam))


def _z_derivs(x, lam, q):
    z = lam * np.abs(x) + np.arctanh(q / lam)
    dz = np.abs(x) - q / (lam**2 - q**2)
    d2z = 2 * q * lam / (lam**2 - q**2) ** 2
    return z, dz, d2z


def dlam_ground_state_values(x, lam, q=0.0):
    z, dz, _ = _z_derivs(x, lam, q)
    s, t = 1 / np.cosh(z), np.tanh(z)
    return s - lam * s * t * dz


def d2lam_ground_state_values(x, lam, q=0.0):
    z, dz, d2z = _z_derivs(x, lam, q)
    s, t = 1 / np.cosh(z), np.tanh(z)
    return -2 * s * t * dz - lam * s * (s**2 - t**2) * dz**2 - lam * s * t * d2z


def ground_state(params, grid):
    return Field(grid, ground_state_values(grid.x, params.lam, params.q))


def select_lambda_linear(w0, q=0.0):
    """lam = 1 + <w0, v_1> for the ground state with the same q.

    v_1 has a corner at 0, so the trapezoid sum gets the kink correction.
    """
    v1 = ground_state_values(w0.grid.x, 1.0, q)
    return 1.0 + float(integrate_kinked(np.real(w0.values) * v1, w0.grid))


def kernel_pair(params, grid):
    v = ground_state_values(grid.x, params.lam, params.q)
    dv = dlam_ground_state_values(grid.x, params.lam, params.q)
    return KernelPair(Field(grid, 1j * v), Field(grid, dv))


def project_kernel(phi, params):
    """P phi = w(phi, d_lam v) i v - w(phi, i v) d_lam v.

    Divided by the discrete w(i v, d_lam v) (= 1 up to O(dx^2)) so that P is
    an exact projection on the grid.
    """
    kp = kernel_pair(params, phi.grid)
    nrm = symplectic_form(kp.v3, kp.v4)
    return (symplectic_form(phi, kp.v4) * kp.v3 - symplectic_form(phi, kp.v3) * kp.v4) * (1 / nrm)


def _selection_residual(phi, lam, theta, q):
    x = phi.grid.x
    p = np.exp(-1j * theta) * phi.values
    v = ground_state_values(x, lam, q)
    dv = dlam_ground_state_values(x, lam, q)
    d2v = d2lam_ground_state_values(x, lam, q)

    def I(f):
        return integrate(p * f, phi.grid)

    Iv, Idv, Id2v = I(v), I(dv), I(d2v)
    # discrete int v^2 rather than 2(lam - q) so that v_lam is an exact root
    vv = integrate(v * v, phi.grid)
    vdv = integrate(v * dv, phi.grid)
    F = np.array([vv - Iv.real, Idv.imag])
    J = np.array([[2 * vdv - Idv.real, -Iv.imag],
                  [Id2v.imag, -Idv.real]])
    return F, J


def select_lambda_exact(phi, q=0.0, guess=(1.0, 0.0), tol=1e-10, maxiter=50):
    """Newton solve of P_lam(e^{-i theta} phi - v_lam) = 0 for (lam, theta)."""
    lam, theta = map(float, guess)
    for _ in range(maxiter):
        F, J = _selection_residual(phi, lam, theta, q)
        if np.max(np.abs(F)) < tol:
            return lam, theta
        try:
            dl, dth = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        lam, theta = lam + dl, theta + dth
        if not lam > abs(q):
            break
    F, _ = _selection_residual(phi, lam, theta, q) if lam > abs(q) else (np.array([np.inf]), None)
    if np.max(np.abs(F)) < tol:
        return lam, theta
    raise ConvergenceError("no root for the eigenvalue selection; perturbation too large")


# coercivity ---------------------------------------------------------------

def _even_forms(grid, params):
    """Quadratic forms of L_{q+}, L_{q-} and the H1 norm restricted to even f.

    Nodes 0..N on x >= 0 (N+1 = boundary, Dirichlet).  Built as E^T M E with E
    the even extension, with the trapezoid weight dx at every interior node.
    """
    dx, c = grid.dx, grid.center
    m = grid.n - 2
    v = ground_state_values(grid.x[1:-1], params.lam, params.q)
    # stiffness of -d^2 (forward differences, Dirichlet ends)
    K = sp.diags([np.full(m - 1, -1.0), np.full(m, 2.0), np.full(m - 1, -1.0)], [-1, 0, 1]) / dx
    Mass = sp.identity(m) * dx
    spike = sp.csr_matrix(([1.0], ([c - 1], [c - 1])), shape=(m, m))
    lam2 = params.lam**2
    Lp = 0.5 * (K + lam2 * Mass - sp.diags(6 * v**2 * dx) - 2 * params.q * spike)
    Lm = 0.5 * (K + lam2 * Mass - sp.diags(2 * v**2 * dx) - 2 * params.q * spike)
    H1 = K + Mass
    half = m - (c - 1)          # interior nodes with x >= 0
    rows = np.arange(m)
    cols = np.abs(rows - (c - 1))
    E = sp.csr_matrix((np.ones(m), (rows, cols)), shape=(m, half))

    def red(A):
        return (E.T @ A @ E).tocsc()

    x_half = grid.x[c:-1]
    vv = ground_state_values(x_half, params.lam, params.q)
    dv = dlam_ground_state_values(x_half, params.lam, params.q)
    w = np.full(half, 2 * dx)
    w[0] = dx
    return red(Lp), red(Lm), red(H1), w * vv, w * dv


def _constrained_min_inverse_power(A, M, c, shift, tol=1e-12, maxiter=5000):
    """Smallest eigenvalue of A f = mu M f + alpha c subject to c.f = 0."""
    lu = spl.splu((A - shift * M).tocsc())
    z = lu.solve(c)
    czc = c @ z

    def solve(b):
        y = lu.solve(b)
        return y - z * (c @ y) / czc

    rng = np.random.default_rng(0)
    f = solve(M @ rng.standard_normal(A.shape[0]))
    mu_old = np.inf
    for _ in range(maxiter):
        f /= np.sqrt(f @ (M @ f))
        mu = f @ (A @ f)
        if abs(mu - mu_old) < tol * max(1.0, abs(mu)):
            return float(mu)
        mu_old = mu
        f = solve(M @ f)
    raise ConvergenceError("inverse power iteration for the coercivity constant did not converge")


def coercivity_estimate(q, grid, lam=1.0, constrained=True):
    """min <L_q f, f> / ||f||_{H1}^2 over even f, symplectically orthogonal to the kernel."""
    params = GroundStateParams(lam, q)
    Lp, Lm, H1, cv, cdv = _even_forms(grid, params)
    mus = []
    for A, c in ((Lp, cv), (Lm, cdv)):
        # a shift below the unconstrained bottom keeps A - shift*M definite
        shift = -4.0 * lam**2
        if constrained:
            mus.append(_constrained_min_inverse_power(A, H1, c, shift))
        else:
            val = spl.eigsh(A, k=1, M=H1, sigma=shift, which="LM", return_eigenvectors=False)
            mus.append(float(val[0]))
    return min(mus)


def coercivity_dense(q, grid, lam=1.0):
    """Dense reference for coercivity_estimate (use on coarse grids)."""
    params = GroundStateParams(lam, q)
    Lp, Lm, H1, cv, cdv = _even_forms(grid, params)
    mus = []
    for A, c in ((Lp, cv), (Lm, cdv)):
        Q = sl.null_space(c[None, :])
        Ad, Md = A.toarray(), H1.toarray()
        mus.append(sl.eigh(Q.T @ Ad @ Q, Q.T @ Md @ Q, eigvals_only=True, subset_by_index=[0, 0])[0])
    return float(min(mus))


def apply_L_minus(f, grid, lam=1.0, q=0.0):
    """Discrete L_{q-} f = 1/2 (lam^2 - d^2 - 2 v^2 - 2q delta) f at interior nodes."""
    from .core import apply_laplacian_q
    v = ground_state_values(grid.x[1:-1], lam, q)
    f = np.asarray(f)
    return 0.5 * (lam**2 * f[1:-1] - apply_laplacian_q(f, grid, q) - 2 * v**2 * f[1:-1])
