"""Shared domain types: parameters, grids, states, tableaux, run reports."""

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .kernels import GHOST

MANNING = "manning"
LINEAR = "linear"

#: default Manning exponent eta
ETA_DEFAULT = 7.0 / 3.0


class PositivityError(RuntimeError):
    """Water depth lost positivity; carries the offending location."""


@dataclass(frozen=True)
class PhysParams:
    """Physical constants: gravity g, Manning coefficient k, scaling epsilon,
    friction exponent eta, and the friction model (gamma = g k^2 |m| / h^eta
    for 'manning', gamma = 1 for 'linear')."""

    g: float
    k: float = 0.0
    epsilon: float = 1.0
    eta: float = ETA_DEFAULT
    friction: str = MANNING

    def __post_init__(self):
        if not self.g > 0.0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.k < 0.0:
            raise ValueError(f"k must be nonnegative, got {self.k}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must satisfy 0 < eps <= 1, got {self.epsilon}")
        if not self.eta > 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.friction not in (MANNING, LINEAR):
            raise ValueError(f"unknown friction model {self.friction!r}")

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=float(epsilon))


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid (1D/2D), cell-centered, with ghost layers.

    bc entries are 'periodic' or 'outflow' (zeroth-order extrapolation into
    the ghosts, the non-reflecting far-field treatment)."""

    n: tuple
    lo: tuple
    hi: tuple
    bc: tuple
    ghost: int = GHOST

    def __post_init__(self):
        for name in ("n", "lo", "hi", "bc"):
            v = getattr(self, name)
            if not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(v))
        if not (len(self.n) == len(self.lo) == len(self.hi) == len(self.bc)):
            raise ValueError("n, lo, hi, bc must have equal lengths")
        if self.dim not in (1, 2):
            raise ValueError(f"only 1D/2D grids supported, got dim={self.dim}")
        if self.ghost < 3:
            raise ValueError("ghost width must be >= 3 (WENO5 stencil)")
        for ni in self.n:
            if ni < self.ghost + 1:
                raise ValueError(f"need at least ghost+1 cells per dimension, got {ni}")
        for b in self.bc:
            if b not in ("periodic", "outflow"):
                raise ValueError(f"unknown bc {b!r}")
        for lo, hi in zip(self.lo, self.hi):
            if not hi > lo:
                raise ValueError("hi must exceed lo")

    @property
    def dim(self):
        return len(self.n)

    @property
    def dx(self):
        return tuple((hi - lo) / ni for lo, hi, ni in zip(self.lo, self.hi, self.n))

    @property
    def dx_min(self):
        return min(self.dx)

    @property
    def cell_volume(self):
        return float(np.prod(self.dx))

    @property
    def shape(self):
        """Array shape including ghost layers."""
        return tuple(ni + 2 * self.ghost for ni in self.n)

    @property
    def interior_slices(self):
        return tuple(slice(self.ghost, self.ghost + ni) for ni in self.n)

    def interior(self, arr):
        return arr[self.interior_slices]

    def zeros(self):
        return np.zeros(self.shape)

    def cell_centers(self, axis):
        lo, dx = self.lo[axis], self.dx[axis]
        return lo + (np.arange(self.n[axis]) + 0.5) * dx

    def meshgrid(self):
        axes = [self.cell_centers(a) for a in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")

    def fill_ghosts(self, arr):
        """Refresh ghost layers in place (idempotent); returns arr."""
        g = self.ghost
        for ax, (ni, bc) in enumerate(zip(self.n, self.bc)):
            lo_ghost = _axis_slice(arr.ndim, ax, slice(0, g))
            hi_ghost = _axis_slice(arr.ndim, ax, slice(g + ni, 2 * g + ni))
            if bc == "periodic":
                arr[lo_ghost] = arr[_axis_slice(arr.ndim, ax, slice(ni, g + ni))]
                arr[hi_ghost] = arr[_axis_slice(arr.ndim, ax, slice(g, 2 * g))]
            else:
                arr[lo_ghost] = arr[_axis_slice(arr.ndim, ax, slice(g, g + 1))]
                arr[hi_ghost] = arr[_axis_slice(arr.ndim, ax, slice(g + ni - 1, g + ni))]
        return arr

    def from_interior(self, values):
        """Embed interior values into a ghosted array and fill the ghosts."""
        arr = self.zeros()
        arr[self.interior_slices] = values
        return self.fill_ghosts(arr)

    def sample(self, fn):
        """Sample fn(x[, y]) at interior cell centers, bc-fill the ghosts."""
        return self.from_interior(fn(*self.meshgrid()))


def _axis_slice(ndim, axis, sl):
    idx = [slice(None)] * ndim
    idx[axis] = sl
    return tuple(idx)


def grid_1d(n, lo, hi, bc="periodic"):
    return Grid((n,), (lo,), (hi,), (bc,))


def grid_2d(nx, ny, lo, hi, bc=("periodic", "periodic")):
    return Grid((nx, ny), tuple(lo), tuple(hi), tuple(bc))


@dataclass
class State:
    """Evolved unknowns: ghosted water depth h and momentum components m
    (shape (dim,) + grid.shape), at time t.  Positivity of h is asserted,
    not enforced."""

    grid: Grid
    h: np.ndarray
    m: np.ndarray
    t: float = 0.0

    def copy(self):
        return State(self.grid, self.h.copy(), self.m.copy(), self.t)

    def sync(self):
        self.grid.fill_ghosts(self.h)
        for c in range(self.grid.dim):
            self.grid.fill_ghosts(self.m[c])
        return self

    def check_positive(self, where=""):
        hmin = float(np.min(self.grid.interior(self.h)))
        if not np.isfinite(hmin) or hmin <= 0.0:
            raise PositivityError(
                f"non-positive water depth (min h = {hmin:.3e}) {where}".rstrip())


def state_from_functions(grid, h_fn, m_fns, t=0.0):
    h = grid.sample(h_fn)
    m = np.stack([grid.sample(fn) for fn in m_fns])
    return State(grid, h, m, t)


@dataclass
class Bathymetry:
    """Bottom elevation B (time-independent) plus the precomputed 0.5*g*B^2
    payload used by the well-balanced pressure/source split.  Ghosts of B are
    filled with the grid's boundary conditions (not analytic extension) so
    that still water stays exactly flat up to and including the ghost cells."""

    grid: Grid
    B: np.ndarray
    half_gB2: np.ndarray

    @classmethod
    def from_function(cls, grid, fn, g):
        B = grid.sample(fn)
        return cls(grid, B, 0.5 * g * B * B)

    @classmethod
    def flat(cls, grid):
        return cls(grid, grid.zeros(), grid.zeros())


def surface_level(state, bath):
    """Surface level H = h + B, pointwise including ghosts."""
    if state.grid is not bath.grid and state.grid != bath.grid:
        raise ValueError("state and bathymetry live on different grids")
    return state.h + bath.B


@dataclass(frozen=True)
class DoubleTableau:
    """Paired explicit/implicit RK coefficients (A_ex lower triangular,
    A_im lower triangular with diagonal), shared-b convention."""

    a_ex: np.ndarray
    a_im: np.ndarray
    b_ex: np.ndarray
    b_im: np.ndarray
    c_ex: np.ndarray
    c_im: np.ndarray

    @property
    def stages(self):
        return len(self.b_im)

    @property
    def stiffly_accurate(self):
        return bool(np.array_equal(self.a_im[-1], self.b_im))

    @property
    def shared_b(self):
        return bool(np.array_equal(self.b_ex, self.b_im))


def tableau_si_imex_443():
    """Four-stage, third-order, stiffly accurate IMEX pair used throughout."""
    gamma = 0.435866521508
    a_ex = np.array([
        [0.0, 0.0, 0.0, 0.0],
        [gamma, 0.0, 0.0, 0.0],
        [1.243893189483, -0.525959928729, 0.0, 0.0],
        [0.630412558153, 0.786580740199, -0.416993298352, 0.0],
    ])
    a_im = np.array([
        [gamma, 0.0, 0.0, 0.0],
        [0.0, gamma, 0.0, 0.0],
        [0.0, 0.282066739245, gamma, 0.0],
        [0.0, 1.208496649176, -0.644363170684, gamma],
    ])
    b = np.array([0.0, 1.208496649176, -0.644363170684, gamma])
    c_ex = np.array([0.0, gamma, 0.717933260754, 1.0])
    c_im = np.array([gamma, gamma, 0.717933260754, 1.0])
    return DoubleTableau(a_ex, a_im, b.copy(), b.copy(), c_ex, c_im)


def tableau_implicit_euler():
    """One-stage SA tableau; its implicit half is backward Euler."""
    one = np.array([[1.0]])
    return DoubleTableau(np.array([[0.0]]), one, np.array([1.0]),
                         np.array([1.0]), np.array([0.0]), np.array([1.0]))


def validate_tableau(tab, tol=5e-12):
    """Return a list of violation strings (empty when consistent)."""
    bad = []
    s = tab.stages
    for name, a in (("explicit", tab.a_ex), ("implicit", tab.a_im)):
        if a.shape != (s, s):
            bad.append(f"{name} matrix is not {s}x{s}")
            continue
        first_bad = 1 if name == "implicit" else 0
        for i in range(s):
            for j in range(i + first_bad, s):
                if a[i, j] != 0.0:
                    bad.append(f"{name} a[{i},{j}] above the diagonal is nonzero")
    for i in range(s):
        ce = np.sum(tab.a_ex[i, :i])
        if abs(ce - tab.c_ex[i]) > tol:
            bad.append(f"explicit c[{i}] != row sum ({tab.c_ex[i]} vs {ce})")
        ci = np.sum(tab.a_im[i, :i + 1])
        if abs(ci - tab.c_im[i]) > tol:
            bad.append(f"implicit c[{i}] != row sum ({tab.c_im[i]} vs {ci})")
    if not tab.shared_b:
        bad.append("explicit and implicit weights differ (shared-b violated)")
    if not tab.stiffly_accurate:
        bad.append("last implicit row differs from b (not stiffly accurate)")
    for i in range(s):
        if not tab.a_im[i, i] > 0.0:
            bad.append(f"implicit diagonal a[{i},{i}] is not positive")
    return bad


@dataclass
class RunReport:
    """Per-run bookkeeping: step count, Picard sweep totals, steady-state
    short-circuits, wallclock."""

    steps: int = 0
    picard_total: int = 0
    picard_max: int = 0
    steady_hits: int = 0
    seconds: float = 0.0

    def add_solve(self, iters):
        self.picard_total += iters
        self.picard_max = max(self.picard_max, iters)
