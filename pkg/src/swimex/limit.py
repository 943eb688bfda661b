"""Direct DIRK solver for the friction-dominated limit equation

    d/dt h0 = div( sqrt(h0^(eta+1)/k^2) grad H0 / sqrt(|grad H0|) ),

used as the reference ("lim") curve in asymptotic comparisons.  Spatial
pieces are shared verbatim with the diffusion module so that limit-vs-SWE
comparisons measure the integrator gap, not operator drift."""

import time
from dataclasses import dataclass

import numpy as np

from .core import Grid, RunReport, validate_tableau
from .diffusion import GRAD_FLOOR, limit_coefficient
from .linsolve import solve_depth_sweep
from .reconstruct import DEFAULT_WENO, grad_w
from .timestep import PicardConfig, PicardNonconvergence


@dataclass
class LimitState:
    """Leading-order depth h0 (ghosted) at time t."""

    grid: Grid
    h0: np.ndarray
    t: float = 0.0

    def copy(self):
        return LimitState(self.grid, self.h0.copy(), self.t)


def limit_momentum(h0, bath, params, grid, grad_floor=GRAD_FLOOR,
                   weno_cfg=DEFAULT_WENO):
    """Leading-order momentum m0 = -sqrt(h0^(eta+1)/k^2) grad H0 /
    sqrt(|grad H0|), evaluated with the non-viscous WENO gradient and the
    same degeneracy floor as the limit right-hand side.  Shape (dim,) +
    interior; antiparallel to grad H0."""
    if params.k == 0.0:
        raise ValueError("limit momentum undefined for k = 0")
    H = h0 + bath.B
    gw = grad_w(H, grid, weno_cfg)
    mag = np.sqrt(np.sum(gw * gw, axis=0))
    h_int = grid.interior(h0)
    coef = np.sqrt(h_int ** (params.eta + 1.0) / params.k**2)
    coef /= np.sqrt(np.maximum(mag, grad_floor))
    return -coef * gw


def step_limit_dirk(lstate, bath, params, dt, tableau, cfg=None,
                    grad_floor=GRAD_FLOOR):
    """One DIRK step using the implicit half of the tableau.  Each stage
    equation h = base + tau * rhs(h) is solved by the same coefficient-lagged
    Picard sweeps as the shallow water depth update (each sweep is one
    linear solve).  Stiff accuracy makes the result the last stage."""
    cfg = cfg or PicardConfig()
    bad = validate_tableau(tableau)
    if bad:
        raise ValueError("invalid tableau: " + "; ".join(bad))
    grid = lstate.grid
    grid.fill_ghosts(lstate.h0)
    h_n_int = grid.interior(lstate.h0).copy()
    zeros_p = [grid.zeros() for _ in range(grid.dim)]
    s = tableau.stages
    ks = []
    iters_total = 0
    h_i = lstate.h0
    for i in range(s):
        tau = tableau.a_im[i, i] * dt
        base_int = h_n_int.copy()
        for j in range(i):
            if tableau.a_im[i, j] != 0.0:
                base_int = base_int + dt * tableau.a_im[i, j] * ks[j]
        h_k = grid.from_interior(base_int)
        x_prev = base_int.copy()
        history = []
        for it in range(1, cfg.max_iters + 1):
            H_lag = h_k + bath.B
            c = limit_coefficient(h_k, H_lag, grid, params, grad_floor)
            x = solve_depth_sweep(grid, tau, c, zeros_p, base_int, bath.B, x_prev)
            resid = grid.cell_volume * float(np.sum(np.abs(x - x_prev)))
            history.append(resid)
            x_prev = x
            h_k = grid.from_interior(x)
            iters_total += 1
            if resid < cfg.delta:
                break
        else:
            raise PicardNonconvergence(
                f"limit stage {i} Picard did not converge "
                f"(last residual {history[-1]:.3e})", history)
        ks.append((x_prev - base_int) / tau)
        h_i = h_k
    return LimitState(grid, h_i, lstate.t + dt), iters_total


def limit_wave_speed(lstate, bath, params, grad_floor=GRAD_FLOOR):
    """Convective-scale Lambda for the limit solver, with the velocity taken
    from the leading-order momentum."""
    grid = lstate.grid
    h_int = grid.interior(lstate.h0)
    m0 = limit_momentum(lstate.h0, bath, params, grid, grad_floor)
    u = np.sqrt(np.sum(m0 * m0, axis=0)) / h_int
    return float(np.max(u + np.sqrt(params.g * h_int)))


def advance_limit(lstate, bath, params, t_end, tableau, cfg=None, cfl=0.2,
                  grad_floor=GRAD_FLOOR):
    """March the limit solver to t_end with the convective CFL rule (same
    rule and resolution as the SWE runs it is compared against)."""
    cfg = cfg or PicardConfig()
    total = RunReport()
    t0 = time.perf_counter()
    tiny = 1e-14 * max(1.0, abs(t_end))
    while lstate.t < t_end - tiny:
        lam = limit_wave_speed(lstate, bath, params, grad_floor)
        dt = min(cfl * lstate.grid.dx_min / lam, t_end - lstate.t)
        lstate, iters = step_limit_dirk(lstate, bath, params, dt, tableau,
                                        cfg, grad_floor)
        total.steps += 1
        total.picard_total += iters
        total.picard_max = max(total.picard_max, iters)
    total.seconds = time.perf_counter() - t0
    return lstate, total
