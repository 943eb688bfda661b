"""Vectorized numpy implementation of the stencil kernels.

All functions operate row-wise on a 2D batch of grid lines with shape
(nlines, n + 2*GHOST).  The compiled backend (_kernels_cy) implements the
same signatures with the same operation order, so results agree bitwise.

Face indexing: "narrow" face arrays have n+1 entries (faces 0..n, face f
sitting between cells f-1 and f of the interior), used by the WENO
reconstructions.  "Extended" face arrays have n+3 entries (faces -1..n+1,
stored shifted by one), used by the fourth-order flux divergence.

WENO reconstructions are evaluated on deviations from the face's central
(upwind) cell: constants pass through bitwise, which is what makes the
well-balanced cancellations exact to round-off.
"""

import numpy as np

GHOST = 3

_C13 = 13.0 / 12.0
_D0 = 0.1
_D1 = 0.6
_D2 = 0.3


def _weno_views(lines, bias):
    # Five stencil cells per face, ordered outermost-upwind to outermost-
    # downwind; the third view is the central (upwind) cell.
    g = GHOST
    n = lines.shape[1] - 2 * g
    w = n + 1
    if bias == "left":
        starts = (g - 3, g - 2, g - 1, g, g + 1)
    elif bias == "right":
        starts = (g + 2, g + 1, g, g - 1, g - 2)
    else:
        raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")
    return tuple(lines[:, s:s + w] for s in starts)


def _weno_smoothness(da, db, dd, de):
    b0 = _C13 * (da - 2.0 * db) ** 2 + 0.25 * (da - 4.0 * db) ** 2
    b1 = _C13 * (db + dd) ** 2 + 0.25 * (db - dd) ** 2
    b2 = _C13 * (de - 2.0 * dd) ** 2 + 0.25 * (de - 4.0 * dd) ** 2
    return b0, b1, b2


def _weno_candidates(da, db, dd, de):
    q0 = (2.0 * da - 7.0 * db) / 6.0
    q1 = (2.0 * dd - db) / 6.0
    q2 = (5.0 * dd - de) / 6.0
    return q0, q1, q2


def weno5_faces(lines, bias, eps):
    """Fifth-order upwind-biased face values, one per interior face."""
    a, b, c, d, e = _weno_views(lines, bias)
    da = a - c
    db = b - c
    dd = d - c
    de = e - c
    b0, b1, b2 = _weno_smoothness(da, db, dd, de)
    a0 = _D0 / (eps + b0) ** 2
    a1 = _D1 / (eps + b1) ** 2
    a2 = _D2 / (eps + b2) ** 2
    s = a0 + a1 + a2
    q0, q1, q2 = _weno_candidates(da, db, dd, de)
    return c + (a0 * q0 + a1 * q1 + a2 * q2) / s


def weno5_weights(lines, bias, eps):
    """Nonlinear weights only, shape (3, nlines, n+1)."""
    a, b, c, d, e = _weno_views(lines, bias)
    da = a - c
    db = b - c
    dd = d - c
    de = e - c
    b0, b1, b2 = _weno_smoothness(da, db, dd, de)
    a0 = _D0 / (eps + b0) ** 2
    a1 = _D1 / (eps + b1) ** 2
    a2 = _D2 / (eps + b2) ** 2
    s = a0 + a1 + a2
    out = np.empty((3,) + a0.shape)
    out[0] = a0 / s
    out[1] = a1 / s
    out[2] = a2 / s
    return out


def weno5_faces_fixed(lines, weights, bias):
    """Face values using externally supplied weights (linear operator)."""
    a, b, c, d, e = _weno_views(lines, bias)
    da = a - c
    db = b - c
    dd = d - c
    de = e - c
    q0, q1, q2 = _weno_candidates(da, db, dd, de)
    return c + (weights[0] * q0 + weights[1] * q1 + weights[2] * q2)


def _ext_views(lines):
    # Cells (i-1, i, i+1, i+2) for every extended face, i = GHOST + f - 1
    # with f = -1..n+1; needs the full ghost width of 3.
    g = GHOST
    n = lines.shape[1] - 2 * g
    w = n + 3
    return tuple(lines[:, s:s + w] for s in (g - 3, g - 2, g - 1, g))


def interp4_ext(lines):
    """Fourth-order interpolation to the extended faces."""
    a, b, c, d = _ext_views(lines)
    return (9.0 * (b + c) - (a + d)) / 16.0


def grad4_ext(lines, dx):
    """Fourth-order first derivative at the extended faces."""
    a, b, c, d = _ext_views(lines)
    return ((a - d) + 27.0 * (c - b)) / (24.0 * dx)


def div4_ext(faces, dx):
    """Fourth-order conservative divergence of extended face fluxes."""
    f0 = faces[:, :-3]
    f1 = faces[:, 1:-2]
    f2 = faces[:, 2:-1]
    f3 = faces[:, 3:]
    return ((f0 - f3) + 27.0 * (f2 - f1)) / (24.0 * dx)


def flux_div4(p_faces, c_faces, lines, dx):
    """div4 of the combined face flux p - c * grad4(lines)."""
    return div4_ext(p_faces - c_faces * grad4_ext(lines, dx), dx)
