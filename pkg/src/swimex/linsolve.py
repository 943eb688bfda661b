"""Linear solves for one coefficient-lagged Picard sweep of the implicit
depth update:

    (I - tau * Div(C_f Grad .)) x = h* - tau * Div(P_f - C_f Grad B),

with C_f, P_f face coefficient fields frozen at the lagged iterate.  In 1D
the operator is assembled sparsely and solved directly (the stencil/fold
matrices are cached per grid).  In 2D it is applied matrix-free: CG with an
FFT preconditioner on fully periodic grids (the operator is SPD there),
BiCGStab otherwise."""

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels as K

KRYLOV_RTOL = 1e-12
KRYLOV_MAXITER = 4000


class LinearSolveError(RuntimeError):
    """Inner linear solve failed to reach tolerance."""


def face_coefficient_lines(c_cell, grid):
    """Per-axis face interpolation of a ghosted cell coefficient, floored at
    zero (4th-order interpolation may undershoot near kinks; the floor keeps
    the operator positive semidefinite and is inactive on smooth data).
    Returns [(faces_lines, line_shape)] per axis."""
    out = []
    for ax in range(grid.dim):
        lines, shape = K.to_lines(c_cell, ax)
        out.append((np.maximum(K.interp4_ext(lines), 0.0), shape))
    return out


def _restrict(arr, grid, ax):
    g = grid.ghost
    sl = [slice(g, g + ni) for ni in grid.n]
    sl[ax] = slice(None)
    return arr[tuple(sl)]


def apply_diffusion(x_ghosted, cf_lines, grid):
    """Sum over axes of Div(C_f Grad x), interior-shaped."""
    out = np.zeros(grid.n)
    for ax, (cf, _) in enumerate(cf_lines):
        lines, shape = K.to_lines(x_ghosted, ax)
        div = K.div4_ext(cf * K.grad4_ext(lines, grid.dx[ax]), grid.dx[ax])
        out += _restrict(K.from_lines(div, shape, ax), grid, ax)
    return out


def sweep_rhs(h_star_int, tau, p_ghosted, cf_lines, B_ghosted, grid):
    """h* - tau * Div(P_f - C_f Grad B) with P_f the face interpolation of
    the ghosted advective parts."""
    acc = np.zeros(grid.n)
    for ax, (cf, _) in enumerate(cf_lines):
        p_lines, shape = K.to_lines(p_ghosted[ax], ax)
        b_lines, _ = K.to_lines(B_ghosted, ax)
        dx = grid.dx[ax]
        flux = K.interp4_ext(p_lines) - cf * K.grad4_ext(b_lines, dx)
        acc += _restrict(K.from_lines(K.div4_ext(flux, dx), shape, ax), grid, ax)
    return h_star_int - tau * acc


def _fold(cell, n, bc):
    if bc == "periodic":
        return cell % n
    return min(max(cell, 0), n - 1)


@lru_cache(maxsize=32)
def _stencil_matrices_1d(grid):
    """Sparse face-gradient G ((n+3) x n, boundary conditions folded in) and
    face-divergence D (n x (n+3)) matching the kernel stencils."""
    n = grid.n[0]
    dx = grid.dx[0]
    w = (1.0, -27.0, 27.0, -1.0)
    rows, cols, vals = [], [], []
    for j in range(n + 3):
        f = j - 1
        for m, cell in enumerate((f - 2, f - 1, f, f + 1)):
            rows.append(j)
            cols.append(_fold(cell, n, grid.bc[0]))
            vals.append(w[m] / (24.0 * dx))
    G = sp.coo_matrix((vals, (rows, cols)), shape=(n + 3, n)).tocsr()
    rows, cols, vals = [], [], []
    for c in range(n):
        for m, j in enumerate((c, c + 1, c + 2, c + 3)):
            rows.append(c)
            cols.append(j)
            vals.append(w[m] / (24.0 * dx))
    D = sp.coo_matrix((vals, (rows, cols)), shape=(n, n + 3)).tocsr()
    return G, D


def _solve_1d(grid, tau, cf_lines, b):
    G, D = _stencil_matrices_1d(grid)
    cf = cf_lines[0][0][0]
    A = sp.identity(grid.n[0], format="csr") - tau * (D @ sp.diags(cf) @ G)
    try:
        return spla.splu(A.tocsc()).solve(b)
    except RuntimeError as exc:
        raise LinearSolveError(f"1D direct depth solve failed: {exc}") from exc


def _grad4_face_symbol(theta, dx):
    return (54.0 * np.sin(theta / 2.0) - 2.0 * np.sin(1.5 * theta)) / (24.0 * dx)


def _fft_symbol(grid, tau, c_mean):
    sym = np.zeros(grid.n)
    for ax in range(grid.dim):
        n, dx = grid.n[ax], grid.dx[ax]
        theta = 2.0 * np.pi * np.fft.fftfreq(n)
        gsym = _grad4_face_symbol(theta, dx) ** 2
        shape = [1] * grid.dim
        shape[ax] = n
        sym = sym + gsym.reshape(shape)
    return 1.0 + tau * c_mean * sym


def _solve_2d(grid, tau, cf_lines, b, x0):
    periodic = all(bc == "periodic" for bc in grid.bc)

    def matvec(xv):
        x = grid.from_interior(xv.reshape(grid.n))
        return (xv.reshape(grid.n)
                - tau * apply_diffusion(x, cf_lines, grid)).ravel()

    bn = float(np.linalg.norm(b))
    if bn == 0.0:
        return np.zeros(grid.n)
    if periodic:
        c_mean = float(np.mean([cf.mean() for cf, _ in cf_lines]))
        sym = _fft_symbol(grid, tau, c_mean)

        def precond(rv):
            return np.real(np.fft.ifftn(np.fft.fftn(rv.reshape(grid.n)) / sym)).ravel()

        x, its = _pcg(matvec, b.ravel(), x0.ravel(), precond,
                      KRYLOV_RTOL * bn, KRYLOV_MAXITER)
        if its < 0:
            raise LinearSolveError("preconditioned CG stalled in depth solve")
        return x.reshape(grid.n)
    op = spla.LinearOperator((b.size, b.size), matvec=matvec)
    x, info = spla.bicgstab(op, b.ravel(), x0=x0.ravel(),
                            rtol=KRYLOV_RTOL, atol=0.0, maxiter=KRYLOV_MAXITER)
    if info != 0:
        raise LinearSolveError(f"BiCGStab failed in depth solve (info={info})")
    return x.reshape(grid.n)


def _pcg(matvec, b, x0, precond, atol, maxiter):
    x = x0.copy()
    r = b - matvec(x)
    z = precond(r)
    p = z.copy()
    rz = float(r @ z)
    for it in range(maxiter):
        if np.linalg.norm(r) <= atol:
            return x, it
        ap = matvec(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            return x, -1
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        z = precond(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, -1


def solve_depth_sweep(grid, tau, c_cell, p_ghosted, h_star_int, B_ghosted, x0_int):
    """One Picard sweep: face-interpolate the lagged coefficients, assemble
    the right-hand side, solve the linear system.  Returns the interior
    iterate."""
    cf_lines = face_coefficient_lines(c_cell, grid)
    b = sweep_rhs(h_star_int, tau, p_ghosted, cf_lines, B_ghosted, grid)
    if grid.dim == 1:
        return _solve_1d(grid, tau, cf_lines, b)
    return _solve_2d(grid, tau, cf_lines, b, x0_int)
