"""Time integrators: the stiffly accurate semi-implicit IMEX-RK stepper
(implicit or explicit friction closure), its first-order reduction, the
Picard solver for the implicit depth update, and the steady-state detector.

Stage recipe (per stage i, tau = a_ii dt):

  1. assemble explicit/implicit stage states from the recovered flux
     tendencies of earlier stages;
  2. m* = accumulated implicit part - tau * div_lw((m x m)/h) at the
     explicit state (+ tau * manufactured source, when present);
  3. solve the depth update by Picard iteration: each sweep freezes the
     nonlinear coefficient at the lagged surface gradient and solves the
     resulting *linear* elliptic system (a pure fixed-point evaluation
     diverges once tau * a / dx^2 > 1, i.e. throughout the
     diffusion-dominated regime, so every sweep is a linear solve);
  4. close the stage momentum from the well-balanced split gradient with
     the equilibrium cut-off;
  5. recover the momentum flux tendency algebraically (stiffness-free) and
     take the depth flux tendency as -div_lw(m_I).

Stiff accuracy makes the final state the last stage state, bit-exactly."""

import time
from dataclasses import dataclass, field

import numpy as np

from .core import (LINEAR, PositivityError, RunReport, State, surface_level,
                   tableau_implicit_euler, validate_tableau)
from .diffusion import depth_flux_coefficients
from .friction import (FrictionSolveInput, equilibrium_cutoff,
                       explicit_friction_update, friction_gamma,
                       momentum_update)
from .linsolve import solve_depth_sweep
from .reconstruct import DEFAULT_WENO, div_lw_depth, div_lw_momentum, grad_w, grad_wb_group

XI_CUTOFF = 1e-15


class PicardNonconvergence(RuntimeError):
    """Picard iteration exceeded its cap; carries the residual history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


@dataclass
class PicardConfig:
    """Convergence tolerance (volume-weighted L1 of successive iterates)
    and sweep cap for the implicit depth solve."""

    delta: float = 1e-9
    max_iters: int = 100

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class StageWorkspace:
    """Per-step stage bookkeeping: recovered flux tendencies (kh, km) and
    the explicit/implicit stage states, finalized stage by stage."""

    kh: list = field(default_factory=list)
    km: list = field(default_factory=list)
    h_e: list = field(default_factory=list)
    m_e: list = field(default_factory=list)
    h_i: list = field(default_factory=list)
    m_i: list = field(default_factory=list)


def global_wave_speed(h, m, grid, params):
    """Lambda = max over cells of |u| + min(1, 1/eps) sqrt(g h)."""
    h_int = grid.interior(h)
    u2 = np.zeros(grid.n)
    for c in range(grid.dim):
        u = grid.interior(m[c]) / h_int
        u2 += u * u
    cap = min(1.0, 1.0 / params.epsilon)
    lam = np.sqrt(u2) + cap * np.sqrt(params.g * h_int)
    return float(np.max(lam))


def compute_dt(state, params, cfl, dx_min):
    """CFL * dx_min / Lambda; the acoustic speed is capped by min(1, 1/eps),
    so the step stays convective-scale as eps goes to zero."""
    if not (np.all(np.isfinite(state.h)) and np.all(np.isfinite(state.m))):
        raise ValueError("non-finite state values")
    state.check_positive("in compute_dt")
    lam = global_wave_speed(state.h, state.m, state.grid, params)
    return cfl * dx_min / lam


def steady_state_check(H, grid, delta=1e-9, cfg=DEFAULT_WENO):
    """True when the volume-weighted L1 norm of grad_w(H) is below delta."""
    gw = grad_w(H, grid, cfg)
    mag = np.sqrt(np.sum(gw * gw, axis=0))
    return float(np.sum(mag)) * grid.cell_volume < delta


def picard_solve_depth(h_star, m_star, h_e, bath, tau, params, grid, cfg,
                       closure="implicit", gamma_lag=None):
    """Fixed point of the implicit depth update.  Every sweep freezes the
    nonlinear coefficient (its depth and surface-gradient slots) at the
    previous iterate and solves the linear system in which the unknown
    enters through grad H.  Stops when the volume-weighted L1 change drops
    below cfg.delta.

    h_star may be interior- or ghost-shaped; m_star is ghosted; h_e seeds
    the iteration (the explicit stage depth is the natural O(dt)-accurate
    guess).  Returns (ghosted iterate, sweep count)."""
    if h_star.shape == grid.shape:
        h_star_int = grid.interior(h_star)
    else:
        h_star_int = h_star
    vol = grid.cell_volume
    h_k = h_e.copy()
    x_prev = grid.interior(h_k).copy()
    history = []
    for it in range(1, cfg.max_iters + 1):
        H_lag = h_k + bath.B
        c, p = depth_flux_coefficients(h_k, m_star, H_lag, tau, params, grid,
                                       closure=closure, gamma_lag=gamma_lag)
        x = solve_depth_sweep(grid, tau, c, p, h_star_int, bath.B, x_prev)
        resid = vol * float(np.sum(np.abs(x - x_prev)))
        history.append(resid)
        x_prev = x
        h_k = grid.from_interior(x)
        if resid < cfg.delta:
            return h_k, it
    raise PicardNonconvergence(
        f"depth Picard iteration did not reach delta={cfg.delta:g} within "
        f"{cfg.max_iters} sweeps (last residual {history[-1]:.3e})", history)


def _closed_momentum(h_i, m_star_int, m_n_int, tau, bath, params, grid,
                     closure, gamma_lag_int, xi, weno_cfg):
    """Stage momentum from the well-balanced split gradient, with cut-off."""
    H_i = h_i + bath.B
    wb = grad_wb_group(h_i, H_i, bath, params, grid, weno_cfg)
    eps2 = params.epsilon**2
    rhs = eps2 * m_star_int - tau * wb
    if closure == "implicit" or params.friction == LINEAR:
        m_i = momentum_update(FrictionSolveInput(rhs, tau, grid.interior(h_i), params))
    else:
        m_i = explicit_friction_update(m_star_int, 0.0, wb, gamma_lag_int,
                                       params.epsilon, tau)
    cut = equilibrium_cutoff(rhs, m_n_int, xi)
    m_i[:, cut] = 0.0
    return m_i


def _stack_interior(grid, m):
    return np.stack([grid.interior(m[c]) for c in range(grid.dim)])


def _stack_ghosted(grid, m_int):
    return np.stack([grid.from_interior(m_int[c]) for c in range(grid.dim)])


def _steady_refresh(state, bath, params, dt, cfg, closure, source, xi, weno_cfg):
    """Steady-state short-circuit: depth frozen, momentum refreshed through
    the closure + cut-off only (exactly zero at still water)."""
    grid = state.grid
    m_n_int = _stack_interior(grid, state.m)
    lam = global_wave_speed(state.h, state.m, grid, params)
    conv = div_lw_momentum(state, lam, weno_cfg)
    m_star_int = m_n_int - dt * conv
    if source is not None:
        m_star_int = m_star_int + dt * source(state.t + dt)
    gamma_int = grid.interior(friction_gamma(state.m, state.h, params))
    m_i = _closed_momentum(state.h, m_star_int, m_n_int, dt, bath, params,
                           grid, closure, gamma_int, xi, weno_cfg)
    new = State(grid, state.h.copy(), _stack_ghosted(grid, m_i), state.t + dt)
    rep = RunReport(steps=1, steady_hits=1)
    return new, rep


def step_si_imex_rk(state, bath, params, dt, tableau, cfg=None, closure="implicit",
                    source=None, xi=XI_CUTOFF, weno_cfg=DEFAULT_WENO):
    """One step of the semi-implicit IMEX-RK scheme (implicit friction
    closure: 'si-s1'; pass closure='explicit' for the 'si-s2' variant,
    which retains the structure but lags |m| in the friction coefficient
    and loses the diffusion-limit consistency)."""
    cfg = cfg or PicardConfig()
    bad = validate_tableau(tableau)
    if bad:
        raise ValueError("invalid tableau: " + "; ".join(bad))
    if not (tableau.stiffly_accurate and tableau.shared_b):
        raise ValueError("the IMEX stepper requires a stiffly accurate, shared-b tableau")
    grid = state.grid
    state.sync()
    state.check_positive("at step start")

    if steady_state_check(surface_level(state, bath), grid, cfg.delta, weno_cfg):
        return _steady_refresh(state, bath, params, dt, cfg, closure, source,
                               xi, weno_cfg)

    eps2 = params.epsilon**2
    h_n_int = grid.interior(state.h).copy()
    m_n_int = _stack_interior(grid, state.m)
    s = tableau.stages
    ws = StageWorkspace()
    rep = RunReport(steps=1)

    for i in range(s):
        tau = tableau.a_im[i, i] * dt
        h_e_int = h_n_int.copy()
        m_e_int = m_n_int.copy()
        for j in range(i):
            if tableau.a_ex[i, j] != 0.0:
                h_e_int = h_e_int + dt * tableau.a_ex[i, j] * ws.kh[j]
                m_e_int = m_e_int + dt * tableau.a_ex[i, j] * ws.km[j]
        h_e = grid.from_interior(h_e_int)
        m_e = _stack_ghosted(grid, m_e_int)
        if np.min(h_e_int) <= 0.0:
            raise PositivityError(f"explicit stage {i} lost depth positivity")

        h_star_int = h_n_int.copy()
        m_acc_int = m_n_int.copy()
        for j in range(i):
            if tableau.a_im[i, j] != 0.0:
                h_star_int = h_star_int + dt * tableau.a_im[i, j] * ws.kh[j]
                m_acc_int = m_acc_int + dt * tableau.a_im[i, j] * ws.km[j]

        lam_e = global_wave_speed(h_e, m_e, grid, params)
        stage_state = State(grid, h_e, m_e, state.t)
        conv = div_lw_momentum(stage_state, lam_e, weno_cfg)
        m_star_int = m_acc_int - tau * conv
        if source is not None:
            m_star_int = m_star_int + tau * source(state.t + tableau.c_im[i] * dt)
        m_star = _stack_ghosted(grid, m_star_int)

        gamma_lag = None
        gamma_int = None
        if closure == "explicit" and params.friction != LINEAR:
            gamma_lag = friction_gamma(m_e, h_e, params)
            gamma_int = grid.interior(gamma_lag)

        h_i, iters = picard_solve_depth(h_star_int, m_star, h_e, bath, tau,
                                        params, grid, cfg, closure=closure,
                                        gamma_lag=gamma_lag)
        rep.add_solve(iters)
        if np.min(grid.interior(h_i)) <= 0.0:
            raise PositivityError(f"implicit stage {i} lost depth positivity")

        m_i_int = _closed_momentum(h_i, m_star_int, m_n_int, tau, bath, params,
                                   grid, closure, gamma_int, xi, weno_cfg)
        m_i = _stack_ghosted(grid, m_i_int)

        lam_i = global_wave_speed(h_i, m_i, grid, params)
        kh_i = -div_lw_depth(State(grid, h_i, m_i, state.t), bath, lam_i, weno_cfg)
        km_i = (m_i_int - m_acc_int) / tau

        ws.kh.append(kh_i)
        ws.km.append(km_i)
        ws.h_e.append(h_e)
        ws.m_e.append(m_e)
        ws.h_i.append(h_i)
        ws.m_i.append(m_i)

    new = State(grid, ws.h_i[-1].copy(), ws.m_i[-1].copy(), state.t + dt)
    new.sync()
    return new, rep


def step_si_s2(state, bath, params, dt, tableau, cfg=None, source=None,
               xi=XI_CUTOFF, weno_cfg=DEFAULT_WENO):
    """Explicit-friction variant: identical staging, but the friction
    coefficient is lagged at the explicit stage momentum.  Expected to lose
    the diffusion-limit (AP) behavior at small eps."""
    return step_si_imex_rk(state, bath, params, dt, tableau, cfg,
                           closure="explicit", source=source, xi=xi,
                           weno_cfg=weno_cfg)


def step_first_order(state, bath, params, dt, cfg=None, closure="implicit",
                     source=None, xi=XI_CUTOFF, weno_cfg=DEFAULT_WENO):
    """First-order semi-implicit step: the one-stage stiffly accurate
    reduction of the IMEX stepper (implicit Euler pair)."""
    return step_si_imex_rk(state, bath, params, dt, tableau_implicit_euler(),
                           cfg, closure=closure, source=source, xi=xi,
                           weno_cfg=weno_cfg)


def advance(state, bath, params, t_end, tableau, cfg=None, closure="implicit",
            cfl=0.2, source=None, xi=XI_CUTOFF, weno_cfg=DEFAULT_WENO,
            on_step=None):
    """March to t_end (the last step is clipped to land on it exactly).
    Returns (final state, RunReport)."""
    cfg = cfg or PicardConfig()
    total = RunReport()
    t0 = time.perf_counter()
    tiny = 1e-14 * max(1.0, abs(t_end))
    while state.t < t_end - tiny:
        dt = compute_dt(state, params, cfl, state.grid.dx_min)
        dt = min(dt, t_end - state.t)
        state, rep = step_si_imex_rk(state, bath, params, dt, tableau, cfg,
                                     closure=closure, source=source, xi=xi,
                                     weno_cfg=weno_cfg)
        total.steps += rep.steps
        total.picard_total += rep.picard_total
        total.picard_max = max(total.picard_max, rep.picard_max)
        total.steady_hits += rep.steady_hits
        if on_step is not None:
            on_step(state, total)
    total.seconds = time.perf_counter() - t0
    return state, total
