"""Fourth-order conservative discretization of div(a grad H) and the
degenerate-diffusion right-hand side of the friction-dominated limit.

The conservative face-flux form is used throughout: a is interpolated to
faces (4th order), H is differenced across faces (4th order), and the face
fluxes are assembled into a 4th-order cell divergence that telescopes
exactly over periodic domains."""

import numpy as np

from . import kernels as K
from .core import LINEAR

#: floor applied to |grad H| inside the degenerate coefficient; keeps the
#: linearized operator's conditioning ~ tau/(dx^2 sqrt(floor)) manageable
#: while the flux itself still vanishes at flat states.
GRAD_FLOOR = 1e-8


def face_stack(field, grid):
    """4th-order face interpolation of a cell field, per axis (list of
    extended-face arrays in line space plus the line shapes)."""
    out = []
    for ax in range(grid.dim):
        lines, shape = K.to_lines(field, ax)
        out.append((K.interp4_ext(lines), shape))
    return out


def central4_flux_divergence(a, H, grid):
    """Conservative approximation of div(a grad H); a and H ghosted,
    result interior-shaped.  a must be nonnegative."""
    if float(np.min(a)) < 0.0:
        raise ValueError("negative diffusion coefficient (bug in assembly)")
    out = np.zeros(grid.n)
    for ax in range(grid.dim):
        a_lines, shape = K.to_lines(a, ax)
        h_lines, _ = K.to_lines(H, ax)
        dx = grid.dx[ax]
        flux = K.interp4_ext(a_lines) * K.grad4_ext(h_lines, dx)
        div = K.div4_ext(flux, dx)
        out += _restrict_lines(div, shape, grid, ax)
    return out


def _restrict_lines(lines_out, shape, grid, ax):
    arr = K.from_lines(lines_out, shape, ax)
    g = grid.ghost
    sl = [slice(g, g + ni) for ni in grid.n]
    sl[ax] = slice(None)
    return arr[tuple(sl)]


def grad_mag_cell(H, grid):
    """Cell-centered |grad H| from the 4th-order central gradient
    (interior-shaped)."""
    acc = np.zeros(grid.n)
    for ax in range(grid.dim):
        lines, shape = K.to_lines(H, ax)
        gc = _restrict_lines(K.grad4_cell(lines, grid.dx[ax]), shape, grid, ax)
        acc += gc * gc
    return np.sqrt(acc)


def limit_coefficient(h0, H, grid, params, grad_floor=GRAD_FLOOR):
    """Ghosted sqrt(h0^(eta+1)/k^2) / sqrt(max(|grad H|, floor))."""
    if params.friction == LINEAR:
        raise ValueError("the degenerate limit is defined for Manning friction only")
    if params.k == 0.0:
        raise ValueError("limit undefined for k = 0")
    gmag = grad_mag_cell(H, grid)
    h_int = grid.interior(h0)
    coef = np.sqrt(h_int ** (params.eta + 1.0) / params.k**2)
    coef /= np.sqrt(np.maximum(gmag, grad_floor))
    return grid.from_interior(coef)


def limit_rhs(h0, bath, params, grid, grad_floor=GRAD_FLOOR):
    """Right-hand side of the friction-dominated limit

        d/dt h0 = div( sqrt(h0^(eta+1)/k^2) * grad H0 / sqrt(|grad H0|) ),

    with the gradient magnitude floored (see GRAD_FLOOR) and the flux in
    conservative face form.  h0 ghosted, result interior-shaped."""
    H = h0 + bath.B
    a = limit_coefficient(h0, H, grid, params, grad_floor)
    return central4_flux_divergence(a, H, grid)


def depth_flux_coefficients(h_lag, m_star, H_lag, tau, params, grid,
                            closure="implicit", gamma_lag=None):
    """Cell coefficient fields for one Picard sweep of the implicit depth
    update.  The stage momentum closure m = (eps^2 m* - tau g h grad H)
    * 2/D (implicit friction) or / (eps^2 + tau gamma) (explicit friction)
    yields a face flux  F = P - C grad H  with

        C = 2 tau g h / D,          P = (2 eps^2 / D) m*     (implicit)
        C = tau g h / D2,           P = (eps^2 / D2) m*      (explicit)

    where D = eps^2 + sqrt(eps^4 + (4 tau g k^2 / h^eta) |eps^2 m* -
    tau g h grad H|) and D2 = eps^2 + tau gamma_lag.  Every h and grad H
    slot is evaluated at the lagged Picard iterate (h_lag, H_lag), so the
    converged depth equation carries the same implicit-argument flux as the
    momentum closure; evaluating them at the explicit stage state instead
    costs one temporal order.  gamma_lag stays frozen at the explicit stage
    momentum (that lag is the point of the explicit-friction variant).
    Linear friction (gamma = 1) short-circuits the quadratic for both
    closures.  Returns (C ghosted, [P_ax ghosted...])."""
    eps2 = params.epsilon**2
    h_int = grid.interior(h_lag)
    m_int = np.stack([grid.interior(m_star[ax]) for ax in range(grid.dim)])
    gh = params.g * h_int
    if params.friction == LINEAR:
        denom = eps2 + tau
        c_cell = tau * gh / denom
        p_scale = eps2 / denom
    elif closure == "explicit":
        denom = eps2 + tau * grid.interior(gamma_lag)
        c_cell = tau * gh / denom
        p_scale = eps2 / denom
    else:
        acc = np.zeros(grid.n)
        for ax in range(grid.dim):
            lines, shape = K.to_lines(H_lag, ax)
            gc = _restrict_lines(K.grad4_cell(lines, grid.dx[ax]), shape, grid, ax)
            v = eps2 * m_int[ax] - tau * gh * gc
            acc += v * v
        r = np.sqrt(acc)
        denom = eps2 + np.sqrt(eps2**2 + (4.0 * tau * params.g * params.k**2
                                          / h_int**params.eta) * r)
        c_cell = 2.0 * tau * gh / denom
        p_scale = 2.0 * eps2 / denom
    c = grid.from_interior(c_cell)
    p = [grid.from_interior(p_scale * m_int[ax]) for ax in range(grid.dim)]
    return c, p


def diffusion_coefficient(h_lag, m_star, H_lag, tau, params, grid):
    """The nonlinear coefficient a = g h / D of the implicit depth solve
    viewed as div(a grad H); exposed for inspection and tests (the solver
    consumes 2*tau*a via depth_flux_coefficients)."""
    c, _ = depth_flux_coefficients(h_lag, m_star, H_lag, tau, params, grid)
    return c / (2.0 * tau)
