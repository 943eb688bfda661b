"""Closed-form solves for the implicitly treated Manning friction.

The stage momentum equation, scaled by eps^2, reads

    (eps^2 + beta |m|) m = rhs,    beta = tau g k^2 / h^eta,

so |m| solves the quadratic beta x^2 + eps^2 x - |rhs| = 0.  The positive
root is evaluated in the cancellation-free form 2R / (eps^2 + sqrt(eps^4 +
4 beta R)), which stays accurate when eps^4 is negligible against the
discriminant.  Linear friction (gamma = 1) reduces the solve to
m = rhs / (eps^2 + tau)."""

from dataclasses import dataclass

import numpy as np

from .core import LINEAR, PhysParams


@dataclass
class FrictionSolveInput:
    """Per-cell right-hand side vector (eps^2 m* - tau * gradient terms),
    implicit weight tau = a_ii dt, and the depth h_ref entering the friction
    coefficient."""

    rhs: np.ndarray
    tau: float
    h_ref: np.ndarray
    params: PhysParams

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def _vec_norm(vec):
    v = np.asarray(vec, dtype=float)
    if v.ndim == 0:
        return np.abs(v)
    return np.sqrt(np.sum(v * v, axis=0))


def _denominator(inp, r):
    p = inp.params
    eps2 = p.epsilon**2
    beta = inp.tau * p.g * p.k**2 / np.asarray(inp.h_ref, dtype=float)**p.eta
    return eps2 + np.sqrt(eps2 * eps2 + 4.0 * beta * r)


def solve_momentum_norm(inp):
    """Nonnegative root |m| of the friction quadratic; never NaN."""
    r = _vec_norm(inp.rhs)
    if inp.params.friction == LINEAR:
        return r / (inp.params.epsilon**2 + inp.tau)
    return 2.0 * r / _denominator(inp, r)


def momentum_update(inp):
    """Momentum vector m = 2 rhs / (eps^2 + sqrt(eps^4 + 4 beta |rhs|));
    parallel to rhs, with |m| = solve_momentum_norm."""
    rhs = np.asarray(inp.rhs, dtype=float)
    if inp.params.friction == LINEAR:
        return rhs / (inp.params.epsilon**2 + inp.tau)
    return 2.0 * rhs / _denominator(inp, _vec_norm(rhs))


def equilibrium_cutoff(rhs, m_prev, xi=1e-15):
    """True where |rhs| < xi and |m_prev| < xi: the cell sits at (numerical)
    equilibrium and the caller zeroes the momentum to dodge the 0/0 hazard
    at small eps."""
    if not xi > 0.0:
        raise ValueError("xi must be positive")
    return (_vec_norm(rhs) < xi) & (_vec_norm(m_prev) < xi)


def explicit_friction_update(m_n, convective, grad_terms, gamma_n, eps, dt):
    """Momentum closure with the friction coefficient lagged at gamma_n
    (the explicit-friction variant; loses the diffusion-limit consistency
    that the implicit quadratic preserves):

        m = eps^2/(eps^2 + dt gamma_n) {m_n - dt conv - (dt/eps^2) grad}."""
    eps2 = eps * eps
    inner = m_n - dt * np.asarray(convective) - (dt / eps2) * np.asarray(grad_terms)
    return eps2 / (eps2 + dt * np.asarray(gamma_n)) * inner


def friction_gamma(m, h, params):
    """gamma = g k^2 |m| / h^eta (Manning) or 1 (linear), per cell."""
    if params.friction == LINEAR:
        return np.ones_like(np.asarray(h, dtype=float))
    return params.g * params.k**2 * _vec_norm(m) / np.asarray(h, dtype=float)**params.eta
