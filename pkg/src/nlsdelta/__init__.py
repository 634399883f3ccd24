"""Relaxation and breathing of solitons for the cubic NLS with a delta impurity,

    i u_t + u_xx / 2 + q delta_0(x) u + |u|^2 u = 0.

Modules: core (grids, fields, discrete operators), ground_state, pde,
free (q = 0 linearized theory), scattering (q != 0 generalized
eigenfunctions), breathing (propagator at the origin and predictions),
effective (soliton ODE and diagnostics), volterra (threshold solution),
scenarios and cli (experiment harness).
"""
__version__ = "0.1.0"
