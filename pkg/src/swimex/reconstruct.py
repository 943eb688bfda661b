"""WENO5 reconstruction and the three first-derivative operators:
the Lax-Friedrichs split divergence div_lw, the unsplit gradient grad_w,
and the well-balanced grouped gradient grad_wb_group.

All operators consume ghosted fields (ghosts refreshed by the caller) and
return interior-shaped arrays, sweeping dimension by dimension."""

from dataclasses import dataclass

import numpy as np

from . import kernels as K
from .core import surface_level


@dataclass(frozen=True)
class WenoConfig:
    """Classical reconstruction parameters; shared_indicator_source names the
    field supplying the smoothness indicators for the well-balanced group
    ('surface' = the surface level H, the quantity constant at equilibrium)."""

    eps_weno: float = 1e-6
    ideal_weights: tuple = (0.1, 0.6, 0.3)
    shared_indicator_source: str = "surface"

    def __post_init__(self):
        if not self.eps_weno > 0.0:
            raise ValueError("eps_weno must be positive")
        if abs(sum(self.ideal_weights) - 1.0) > 1e-14:
            raise ValueError("ideal weights must sum to 1")


DEFAULT_WENO = WenoConfig()


def weno5_face_values(cells, bias, eps=DEFAULT_WENO.eps_weno):
    """Single-stencil reference reconstruction: five contiguous cell values
    to one upwind-biased face value (face between cells 2 and 3 for 'left'
    bias, between 1 and 2 for 'right').  The batched kernels reproduce this
    function exactly; it doubles as their test oracle."""
    v = [float(x) for x in cells]
    if len(v) != 5:
        raise ValueError("need exactly 5 cell values")
    if bias == "left":
        a, b, c, d, e = v
    elif bias == "right":
        e, d, c, b, a = v
    else:
        raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")
    da, db, dd, de = a - c, b - c, d - c, e - c
    b0 = 13.0 / 12.0 * (da - 2.0 * db) ** 2 + 0.25 * (da - 4.0 * db) ** 2
    b1 = 13.0 / 12.0 * (db + dd) ** 2 + 0.25 * (db - dd) ** 2
    b2 = 13.0 / 12.0 * (de - 2.0 * dd) ** 2 + 0.25 * (de - 4.0 * dd) ** 2
    a0 = 0.1 / (eps + b0) ** 2
    a1 = 0.6 / (eps + b1) ** 2
    a2 = 0.3 / (eps + b2) ** 2
    s = a0 + a1 + a2
    q0 = (2.0 * da - 7.0 * db) / 6.0
    q1 = (2.0 * dd - db) / 6.0
    q2 = (5.0 * dd - de) / 6.0
    return c + (a0 * q0 + a1 * q1 + a2 * q2) / s


def _upwind_flux_div(fplus, fminus, grid, axis, eps):
    """(d/dx_axis) of the split flux: left-biased f+ plus right-biased f-."""
    lines_p, shape = K.to_lines(fplus, axis)
    lines_m, _ = K.to_lines(fminus, axis)
    faces = K.weno5_faces(lines_p, "left", eps) + K.weno5_faces(lines_m, "right", eps)
    div = K.diff_faces(faces, grid.dx[axis])
    return _restrict(K.from_lines(div, shape, axis), grid, axis)


def _restrict(arr, grid, axis):
    """Drop ghost layers of every axis except the (already narrowed) one."""
    g = grid.ghost
    sl = [slice(g, g + ni) for ni in grid.n]
    sl[axis] = slice(None)
    return arr[tuple(sl)]


def div_lw_depth(state, bath, lam, cfg=DEFAULT_WENO):
    """Conservative WENO5 divergence of the momentum in the depth equation.
    The Lax-Friedrichs splitting dissipates on the surface level H rather
    than on h, so flat surfaces contribute exactly nothing."""
    if not lam > 0.0:
        raise ValueError(f"wave speed must be positive, got {lam}")
    grid = state.grid
    H = surface_level(state, bath)
    out = np.zeros(grid.n)
    for ax in range(grid.dim):
        fplus = 0.5 * (state.m[ax] + lam * H)
        fminus = 0.5 * (state.m[ax] - lam * H)
        out += _upwind_flux_div(fplus, fminus, grid, ax, cfg.eps_weno)
    return out


def div_lw_momentum(state, lam, cfg=DEFAULT_WENO):
    """Componentwise WENO5 divergence of the convective flux (m x m)/h with
    standard LF splitting on m; shape (dim,) + interior."""
    if not lam > 0.0:
        raise ValueError(f"wave speed must be positive, got {lam}")
    grid = state.grid
    out = np.zeros((grid.dim,) + grid.n)
    for ax in range(grid.dim):
        for comp in range(grid.dim):
            flux = state.m[comp] * state.m[ax] / state.h
            fplus = 0.5 * (flux + lam * state.m[comp])
            fminus = 0.5 * (flux - lam * state.m[comp])
            out[comp] += _upwind_flux_div(fplus, fminus, grid, ax, cfg.eps_weno)
    return out


def div_lw(state, bath, lam, which, cfg=DEFAULT_WENO):
    if which == "h-flux":
        return div_lw_depth(state, bath, lam, cfg)
    if which == "momentum-flux":
        return div_lw_momentum(state, lam, cfg)
    raise ValueError(f"which must be 'h-flux' or 'momentum-flux', got {which!r}")


def grad_w(field, grid, cfg=DEFAULT_WENO):
    """Non-viscous WENO derivative: mean of the two biased reconstructions.
    Returns a (dim,) + interior array."""
    out = np.empty((grid.dim,) + grid.n)
    for ax in range(grid.dim):
        lines, shape = K.to_lines(field, ax)
        fl = K.weno5_faces(lines, "left", cfg.eps_weno)
        fr = K.weno5_faces(lines, "right", cfg.eps_weno)
        div = 0.5 * (K.diff_faces(fl, grid.dx[ax]) + K.diff_faces(fr, grid.dx[ax]))
        out[ax] = _restrict(K.from_lines(div, shape, ax), grid, ax)
    return out


def grad_wb_group(h, H, bath, params, grid, cfg=DEFAULT_WENO):
    """Combined well-balanced pressure/topography gradient

        grad_wb(0.5 g h^2) + g H grad_wb(B) - grad_wb(0.5 g B^2),

    with all three reconstructions sharing one set of nonlinear weights
    computed from H.  With shared weights the operator is linear across the
    group, so a flat surface cancels the three terms to round-off regardless
    of B.  Returns (dim,) + interior."""
    g = params.g
    ph = 0.5 * g * h * h
    out = np.empty((grid.dim,) + grid.n)
    H_int = grid.interior(H)
    for ax in range(grid.dim):
        ind_lines, shape = K.to_lines(H, ax)
        ph_lines, _ = K.to_lines(ph, ax)
        b_lines, _ = K.to_lines(bath.B, ax)
        q_lines, _ = K.to_lines(bath.half_gB2, ax)
        dx = grid.dx[ax]
        acc = 0.0
        for bias in ("left", "right"):
            w = K.weno5_weights(ind_lines, bias, cfg.eps_weno)
            d_ph = K.diff_faces(K.weno5_faces_fixed(ph_lines, w, bias), dx)
            d_b = K.diff_faces(K.weno5_faces_fixed(b_lines, w, bias), dx)
            d_q = K.diff_faces(K.weno5_faces_fixed(q_lines, w, bias), dx)
            part = _restrict(K.from_lines(d_ph, shape, ax), grid, ax) \
                + g * H_int * _restrict(K.from_lines(d_b, shape, ax), grid, ax) \
                - _restrict(K.from_lines(d_q, shape, ax), grid, ax)
            acc = acc + part
        out[ax] = 0.5 * acc
    return out
